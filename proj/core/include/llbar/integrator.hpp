#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "llbar/field.hpp"
#include "llbar/field_ops.hpp"
#include "llbar/noise.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

enum class Scheme { exponential_euler, imex_euler };

const char* scheme_name(Scheme s);
/// Throws ConfigError for an unknown name.
Scheme parse_scheme(const std::string& name);

struct SchemeConfig {
  double dt = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::exponential_euler;
  int n = -1;  ///< Galerkin cutoff; negative selects the full basis
  int record_every = 1;

  /// Throws ConfigError unless 0 < dt, dt <= T (or T == 0), T/dt is an
  /// integer to 1e-9, record_every >= 1 and n <= basis cutoff.
  void validate(const SpectralBasis& basis) const;
  std::uint64_t step_count() const;
  int cutoff(const SpectralBasis& basis) const;
};

struct TrajectoryState {
  double t = 0.0;
  SpectralField u;
  std::uint64_t step = 0;
};

/// F = (lambda_r + lambda_e mu) H - gamma Pi(u x H) + Pi S(u), truncated at n.
SpectralField drift(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p, int n);

/// The stiff part A and the per-mode linear symbol of the full drift,
/// l_k = (lambda_r + lambda_e mu_k)(-alpha mu_k + kappa1) = c_k - a_k.
struct LinearSplit {
  OperatorA A;
  std::vector<double> full_symbol;
};

LinearSplit split_linear(const SpectralBasis& basis, const ModelParams& p);
/// N(u) = drift(u) + A u.
SpectralField remainder(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        const OperatorA& A, int n);

/// Single-trajectory time stepper. Holds per-mode propagators and scratch,
/// so one instance must not be shared between threads.
class Stepper {
 public:
  Stepper(const SpectralBasis& basis, const ModelParams& p, const NoiseFamily& fam, const SchemeConfig& cfg);

  /// Advances one step using the increments for `state.step` drawn from `path`.
  /// Throws BlowUpError if the new state is not finite.
  void step(TrajectoryState& state, const NoisePath& path);
  /// Same, with caller-supplied Wiener increments (one per noise direction).
  void step(TrajectoryState& state, std::span<const double> dW);

  /// Drift of the current model at u (reuses the stepper workspace).
  const SpectralField& drift(const SpectralField& u);

  const LinearSplit& split() const noexcept { return split_; }
  const SchemeConfig& config() const noexcept { return cfg_; }

 private:
  // Requires uv_ to hold the current state, as left by drift().
  void noise_term(std::span<const double> dW, SpectralField& out);
  void mask(SpectralField& f) const;

  const SpectralBasis& basis_;
  ModelParams p_;
  const NoiseFamily& fam_;
  SchemeConfig cfg_;
  LinearSplit split_;
  std::vector<char> keep_;
  std::vector<double> prop_;   // e^{h l} or 1 / (1 + h a)
  std::vector<double> phi_;    // h phi1(h l)
  std::vector<double> dw_;
  VectorField uv_, wv_;
  SpectralField cub_, h_, f_, tmp_, noise_;
};

/// Called with the state at step 0, at every multiple of record_every and at the final step.
using StateSink = std::function<void(const TrajectoryState&)>;

struct IntegrationResult {
  TrajectoryState state;
  std::uint64_t noise_checksum = 0;  ///< FNV-1a over the bit patterns of all increments consumed
};

/// Integrates Pi_n u0 from t = 0 to cfg.T. Deterministic in all arguments.
IntegrationResult integrate(const SpectralBasis& basis, const SpectralField& u0, const SchemeConfig& cfg,
                            const ModelParams& p, const NoiseFamily& fam, const NoisePath& path,
                            const StateSink& sink = {});

/// phi1(z) = (e^z - 1) / z with a series branch near zero.
double phi1(double z);

}  // namespace llbar
