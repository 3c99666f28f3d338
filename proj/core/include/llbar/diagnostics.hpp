#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "llbar/field.hpp"
#include "llbar/field_ops.hpp"
#include "llbar/integrator.hpp"
#include "llbar/noise.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

struct DiagnosticsRecord {
  double t = 0.0;
  double norm_u_L2 = 0.0;
  double norm_grad_u = 0.0;
  double norm_lap_u = 0.0;
  double norm_u_L4 = 0.0;
  double norm_u_Linf = 0.0;
  double psi = 0.0;
  double norm_H_L2 = 0.0;
  double norm_grad_H = 0.0;
  double quad_var = 0.0;  ///< sum_k ||Pi_n G_k(u)||^2

  double h1_sq() const { return norm_u_L2 * norm_u_L2 + norm_grad_u * norm_grad_u; }
  double h2_sq() const { return h1_sq() + norm_lap_u * norm_lap_u; }
  double l4_4() const {
    const double s = norm_u_L4 * norm_u_L4;
    return s * s;
  }
};

using Trajectory = std::vector<DiagnosticsRecord>;

inline constexpr std::string_view kTrajectoryColumns =
    "t,norm_u_L2,norm_grad_u,norm_lap_u,norm_u_L4,norm_u_Linf,psi,norm_H_L2,norm_grad_H,quad_var";

DiagnosticsRecord record(const SpectralBasis& basis, const TrajectoryState& state, const ModelParams& p,
                         const NoiseFamily& fam);

/// One CSV row, every value printed with 17 significant digits.
std::string csv_row(const DiagnosticsRecord& r);
std::string format_double(double x);

struct DecayReport {
  double mu_theoretical = 0.0;
  double tol = 0.05;
  std::vector<double> max_ratio;  ///< per path: max over recorded t > 0 of ||u||^2 e^{mu t} / ||u0||^2
  int violations = 0;             ///< paths with max_ratio > 1 + tol
  double worst_excess = 0.0;      ///< max over paths of (max_ratio - 1)_+
  double empirical_rate = 0.0;    ///< mean over paths of the fitted decay rate of ||u||^2
};

/// Lambda_r - gamma^2 sigma_h^2 / 2.
double decay_rate(const ModelParams& p, const NoiseFamily& fam);
/// Throws HypothesisError unless kappa1 = -1, g = 0, S = 0 and lambda_r > gamma^2 sigma_h^2 / 2.
void require_decay_hypotheses(const ModelParams& p, const NoiseFamily& fam);

/// Throws HypothesisError (see above) or ConfigError on an empty ensemble or trajectory.
DecayReport check_pathwise_decay(const std::vector<Trajectory>& paths, const ModelParams& p,
                                 const NoiseFamily& fam, double tol = 0.05);

struct IntegratedBound {
  double int_h2 = 0.0;   ///< int_0^T ||u||_{H^2}^2 dt
  double int_l4 = 0.0;   ///< int_0^T ||u||_{L^4}^4 dt
  double ratio = 0.0;    ///< (int_h2 + int_l4) / ||u0||^2, 0 when u0 = 0
};

/// Trapezoid integrals over the records with t <= T_max (all records when T_max < 0).
IntegratedBound check_integrated_bound(const Trajectory& records, double T_max = -1.0);

double trapezoid(const std::vector<double>& t, const std::vector<double>& f);

struct MomentEstimate {
  double mean = 0.0;
  double sd = 0.0;
  double ci_half = 0.0;  ///< 1.96 sd / sqrt(M)
  int paths = 0;
  double ci_width() const { return 2.0 * ci_half; }
};

/// Sample mean with a normal-approximation 95% interval. Throws ConfigError for fewer than 2 samples.
MomentEstimate estimate_mean(const std::vector<double>& samples);

struct Moments {
  MomentEstimate sup_l2;      ///< E sup_t ||u||^{2p}
  MomentEstimate integral_h2; ///< E (int_0^T ||u||_{H^2}^2 dt)^p
};

Moments mc_moments(const std::vector<Trajectory>& paths, int p);

enum class Observable { l2_sq, h1_sq, psi };
const char* observable_name(Observable o);
double observe(Observable o, const DiagnosticsRecord& r);

/// Running Cesaro mean (1/(T - burn_in)) int_{burn_in}^T phi dt with trapezoid
/// updates. Cumulative integrals are kept at every update so window means over
/// any [a, b] between recorded times can be recomputed.
class ErgodicAverage {
 public:
  explicit ErgodicAverage(Observable obs, double burn_in = 0.0) : obs_(obs), burn_in_(burn_in) {}

  /// Throws ConfigError when t does not increase.
  void update(const DiagnosticsRecord& r);
  void update(double t, double value);

  Observable observable() const noexcept { return obs_; }
  double burn_in() const noexcept { return burn_in_; }
  double mean() const;
  /// Mean over [a, b]; both ends must lie inside the recorded span.
  double window_mean(double a, double b) const;
  /// Standard deviation of the observable samples with t >= burn_in.
  double tail_sd() const;
  std::size_t samples() const noexcept { return times_.size(); }

 private:
  double cumulative_at(double t) const;

  Observable obs_;
  double burn_in_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> cumulative_;  // int_{t_0}^{t_i} phi dt
  long tail_n_ = 0;
  double tail_mean_ = 0.0;
  double tail_m2_ = 0.0;
};

/// A trajectory kept as coefficient snapshots, for error curves between coupled runs.
struct CoupledRun {
  double lambda_e = 0.0;
  std::uint64_t noise_checksum = 0;
  std::vector<double> times;
  std::vector<SpectralField> states;
};

/// sup_t ||u - v||^2 + int_0^T ||u - v||_{H^1}^2 dt over common record times.
double coupled_error(const SpectralBasis& basis, const CoupledRun& a, const CoupledRun& b);

struct LlbLimitReport {
  std::vector<double> eps;
  std::vector<MomentEstimate> error;
  bool strictly_decreasing = false;
  double slope = 0.0;  ///< least-squares slope of log error against log eps
};

/// reference[m] is the lambda_e = 0 run of path m; runs[j][m] the lambda_e = eps_j run.
/// Throws ConfigError on mismatched checksums, initial data or record times and
/// HypothesisError for d = 3 or eps >= lambda_r.
LlbLimitReport llb_limit_error(const SpectralBasis& basis, double lambda_r,
                               const std::vector<CoupledRun>& reference,
                               const std::vector<std::vector<CoupledRun>>& runs);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace llbar
