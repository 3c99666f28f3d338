#include "llbar/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "llbar/error.hpp"

namespace llbar {

DiagnosticsRecord record(const SpectralBasis& basis, const TrajectoryState& state, const ModelParams& p,
                         const NoiseFamily& fam) {
  const Norms n = norms(basis, state.u);
  const SpectralField H = effective_field(basis, state.u, p);
  DiagnosticsRecord r;
  r.t = state.t;
  r.norm_u_L2 = n.l2;
  r.norm_grad_u = n.grad;
  r.norm_lap_u = n.lap;
  r.norm_u_L4 = n.l4;
  r.norm_u_Linf = n.linf;
  r.psi = energy_psi(n, p);
  r.norm_H_L2 = std::sqrt(inner(H, H));
  r.norm_grad_H = std::sqrt(grad_norm_sq(basis, H));
  r.quad_var = quadratic_variation_sum(basis, state.u, fam, p.gamma);
  return r;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_row(const DiagnosticsRecord& r) {
  const double v[] = {r.t,   r.norm_u_L2, r.norm_grad_u, r.norm_lap_u,  r.norm_u_L4,
                      r.norm_u_Linf, r.psi, r.norm_H_L2, r.norm_grad_H, r.quad_var};
  std::string out;
  for (std::size_t i = 0; i < std::size(v); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double decay_rate(const ModelParams& p, const NoiseFamily& fam) {
  return p.lambda_r - 0.5 * p.gamma * p.gamma * fam.sigma_h2;
}

void require_decay_hypotheses(const ModelParams& p, const NoiseFamily& fam) {
  if (p.kappa1 != -1.0) throw HypothesisError("decay check requires kappa1 = -1 (above the Curie temperature)");
  if (!fam.additive_off()) throw HypothesisError("decay check requires additive noise g_k = 0");
  if (p.has_torque()) throw HypothesisError("decay check requires S = 0 (no spin current, no affine torque)");
  if (!(decay_rate(p, fam) > 0.0))
    throw HypothesisError("decay check requires lambda_r > gamma^2 sigma_h^2 / 2 (got mu = " +
                          format_double(decay_rate(p, fam)) + ")");
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

DecayReport check_pathwise_decay(const std::vector<Trajectory>& paths, const ModelParams& p,
                                 const NoiseFamily& fam, double tol) {
  require_decay_hypotheses(p, fam);
  if (paths.empty()) throw ConfigError("decay check needs at least one trajectory");
  DecayReport rep;
  rep.mu_theoretical = decay_rate(p, fam);
  rep.tol = tol;
  double rate_sum = 0.0;
  int rate_count = 0;
  for (const auto& tr : paths) {
    if (tr.empty()) throw ConfigError("decay check got an empty trajectory");
    const double r0 = tr.front().norm_u_L2 * tr.front().norm_u_L2;
    double worst = 0.0;
    std::vector<double> ts, logs;
    for (const auto& r : tr) {
      const double e = r.norm_u_L2 * r.norm_u_L2;
      if (r.t > 0.0 && r0 > 0.0) worst = std::max(worst, e * std::exp(rep.mu_theoretical * r.t) / r0);
      if (e > 0.0) {
        ts.push_back(r.t);
        logs.push_back(std::log(e));
      }
    }
    rep.max_ratio.push_back(worst);
    if (worst > 1.0 + tol) ++rep.violations;
    rep.worst_excess = std::max(rep.worst_excess, worst - 1.0);
    const double s = fit_slope(ts, logs);
    if (std::isfinite(s)) {
      rate_sum += -s;
      ++rate_count;
    }
  }
  rep.empirical_rate = rate_count ? rate_sum / rate_count : 0.0;
  return rep;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

IntegratedBound check_integrated_bound(const Trajectory& records, double T_max) {
  IntegratedBound b;
  if (records.empty()) return b;
  std::vector<double> t, h2, l4;
  for (const auto& r : records) {
    if (T_max >= 0.0 && r.t > T_max * (1.0 + 1e-12)) break;
    t.push_back(r.t);
    h2.push_back(r.h2_sq());
    l4.push_back(r.l4_4());
  }
  b.int_h2 = trapezoid(t, h2);
  b.int_l4 = trapezoid(t, l4);
  const double r0 = records.front().norm_u_L2 * records.front().norm_u_L2;
  b.ratio = r0 > 0.0 ? (b.int_h2 + b.int_l4) / r0 : 0.0;
  return b;
}

namespace {

MomentEstimate summarize(const std::vector<double>& x) {
  MomentEstimate e;
  e.paths = static_cast<int>(x.size());
  if (x.empty()) return e;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  e.mean = mean;
  e.sd = x.size() > 1 ? std::sqrt(ss / (x.size() - 1)) : 0.0;
  e.ci_half = 1.96 * e.sd / std::sqrt(static_cast<double>(x.size()));
  return e;
}

}  // namespace

MomentEstimate estimate_mean(const std::vector<double>& samples) {
  if (samples.size() < 2) throw ConfigError("a Monte Carlo estimate needs at least 2 paths");
  return summarize(samples);
}

Moments mc_moments(const std::vector<Trajectory>& paths, int p) {
  if (p < 1) throw ConfigError("moment order must be at least 1");
  std::vector<double> sup, integ;
  for (const auto& tr : paths) {
    double s = 0.0;
    std::vector<double> t, h2;
    for (const auto& r : tr) {
      s = std::max(s, std::pow(r.norm_u_L2, 2.0 * p));
      t.push_back(r.t);
      h2.push_back(r.h2_sq());
    }
    sup.push_back(s);
    integ.push_back(std::pow(trapezoid(t, h2), p));
  }
  return {estimate_mean(sup), estimate_mean(integ)};
}

const char* observable_name(Observable o) {
  switch (o) {
    case Observable::l2_sq: return "norm_u_L2_sq";
    case Observable::h1_sq: return "norm_u_H1_sq";
    case Observable::psi: return "psi";
  }
  return "?";
}

double observe(Observable o, const DiagnosticsRecord& r) {
  switch (o) {
    case Observable::l2_sq: return r.norm_u_L2 * r.norm_u_L2;
    case Observable::h1_sq: return r.h1_sq();
    case Observable::psi: return r.psi;
  }
  return 0.0;
}

void ErgodicAverage::update(const DiagnosticsRecord& r) { update(r.t, observe(obs_, r)); }

void ErgodicAverage::update(double t, double value) {
  if (!times_.empty() && !(t > times_.back()))
    throw ConfigError("ergodic average: time must increase (got " + format_double(t) + " after " +
                      format_double(times_.back()) + ")");
  if (t < burn_in_) return;
  const double c = times_.empty() ? 0.0 : cumulative_.back() + 0.5 * (t - times_.back()) * (value + values_.back());
  times_.push_back(t);
  values_.push_back(value);
  cumulative_.push_back(c);
  ++tail_n_;
  const double d = value - tail_mean_;
  tail_mean_ += d / tail_n_;
  tail_m2_ += d * (value - tail_mean_);
}

double ErgodicAverage::mean() const {
  if (times_.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (times_.size() == 1) return values_.front();
  return cumulative_.back() / (times_.back() - times_.front());
}

double ErgodicAverage::cumulative_at(double t) const {
  if (times_.empty() || t < times_.front() || t > times_.back())
    throw ConfigError("ergodic window endpoint " + format_double(t) + " outside the recorded span");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = (it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1);
  if (i + 1 >= times_.size()) return cumulative_.back();
  const double w = (t - times_[i]) / (times_[i + 1] - times_[i]);
  const double vt = values_[i] + w * (values_[i + 1] - values_[i]);
  return cumulative_[i] + 0.5 * (t - times_[i]) * (values_[i] + vt);
}

double ErgodicAverage::window_mean(double a, double b) const {
  if (!(b > a)) throw ConfigError("ergodic window must have positive length");
  return (cumulative_at(b) - cumulative_at(a)) / (b - a);
}

double ErgodicAverage::tail_sd() const {
  return tail_n_ > 1 ? std::sqrt(tail_m2_ / (tail_n_ - 1)) : 0.0;
}

double coupled_error(const SpectralBasis& basis, const CoupledRun& a, const CoupledRun& b) {
  if (a.times != b.times || a.states.size() != a.times.size() || b.states.size() != b.times.size())
    throw ConfigError("coupled runs must share their record times");
  double sup = 0.0;
  std::vector<double> h1(a.times.size());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    const SpectralField d = a.states[i] - b.states[i];
    const double l2 = inner(d, d);
    sup = std::max(sup, l2);
    h1[i] = l2 + grad_norm_sq(basis, d);
  }
  return sup + trapezoid(a.times, h1);
}

LlbLimitReport llb_limit_error(const SpectralBasis& basis, double lambda_r,
                               const std::vector<CoupledRun>& reference,
                               const std::vector<std::vector<CoupledRun>>& runs) {
  if (basis.dim() == 3)
    throw HypothesisError("the lambda_e -> 0 limit is only established for d in {1, 2}; d = 3 is rejected");
  if (reference.empty()) throw ConfigError("llb limit needs at least one reference path");
  LlbLimitReport rep;
  for (const auto& family : runs) {
    if (family.size() != reference.size()) throw ConfigError("every eps needs one run per reference path");
    const double eps = family.front().lambda_e;
    if (!(eps > 0.0) || !(eps < lambda_r))
      throw HypothesisError("eps must satisfy 0 < eps < lambda_r (got " + format_double(eps) + ")");
    std::vector<double> err;
    for (std::size_t m = 0; m < family.size(); ++m) {
      const CoupledRun& r = family[m];
      const CoupledRun& ref = reference[m];
      if (r.lambda_e != eps) throw ConfigError("runs of one eps carry different lambda_e");
      if (r.noise_checksum != ref.noise_checksum)
        throw ConfigError("path " + std::to_string(m) + " is not driven by the reference noise");
      if (r.states.empty() || ref.states.empty() || !(r.states.front() == ref.states.front()))
        throw ConfigError("path " + std::to_string(m) + " does not share the reference initial data");
      err.push_back(coupled_error(basis, r, ref));
    }
    rep.eps.push_back(eps);
    rep.error.push_back(summarize(err));
  }
  std::vector<std::size_t> order(rep.eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.eps[a] > rep.eps[b]; });
  rep.strictly_decreasing = !order.empty();
  for (std::size_t i = 1; i < order.size(); ++i)
    rep.strictly_decreasing = rep.strictly_decreasing && rep.error[order[i]].mean < rep.error[order[i - 1]].mean;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    if (rep.error[i].mean > 0.0) {
      lx.push_back(std::log(rep.eps[i]));
      ly.push_back(std::log(rep.error[i].mean));
    }
  }
  rep.slope = fit_slope(lx, ly);
  return rep;
}

}  // namespace llbar
