#include "llbar/integrator.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "llbar/error.hpp"

namespace llbar {

const char* scheme_name(Scheme s) {
  return s == Scheme::exponential_euler ? "exponential_euler" : "imex_euler";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "exponential_euler") return Scheme::exponential_euler;
  if (name == "imex_euler") return Scheme::imex_euler;
  throw ConfigError("unknown scheme '" + name + "' (expected exponential_euler or imex_euler)");
}

int SchemeConfig::cutoff(const SpectralBasis& basis) const {
  return n < 0 ? basis.max_cutoff() : n;
}

void SchemeConfig::validate(const SpectralBasis& basis) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("T must be nonnegative");
  if (T > 0.0) {
    if (dt > T) throw ConfigError("dt must not exceed T");
    const double steps = T / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
      throw ConfigError("T must be an integer multiple of dt");
  }
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
  if (n > basis.max_cutoff())
    throw ConfigError("cutoff n = " + std::to_string(n) + " exceeds the basis cutoff " +
                      std::to_string(basis.max_cutoff()));
}

std::uint64_t SchemeConfig::step_count() const {
  return T > 0.0 ? static_cast<std::uint64_t>(std::llround(T / dt)) : 0;
}

double phi1(double z) {
  if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
  return std::expm1(z) / z;
}

LinearSplit split_linear(const SpectralBasis& basis, const ModelParams& p) {
  LinearSplit s;
  s.A = make_operator_a(basis, p.lambda_r, p.lambda_e);
  s.full_symbol.resize(basis.mode_count());
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    const double mu = basis.eigenvalue(i);
    s.full_symbol[i] = (p.lambda_r + p.lambda_e * mu) * (-p.alpha * mu + p.kappa1);
  }
  return s;
}

Stepper::Stepper(const SpectralBasis& basis, const ModelParams& p, const NoiseFamily& fam,
                 const SchemeConfig& cfg)
    : basis_(basis), p_(p), fam_(fam), cfg_(cfg), split_(split_linear(basis, p)) {
  const std::size_t m = basis.mode_count();
  const int n = cfg.cutoff(basis);
  keep_.resize(m);
  prop_.resize(m);
  phi_.resize(m);
  const double h = cfg.dt;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& k = basis.mode(i);
    bool keep = true;
    for (int a = 0; a < basis.dim(); ++a) keep = keep && k[a] <= n;
    keep_[i] = keep;
    if (cfg.scheme == Scheme::exponential_euler) {
      const double z = h * split_.full_symbol[i];
      prop_[i] = std::exp(z);
      phi_[i] = h * phi1(z);
    } else {
      prop_[i] = 1.0 / (1.0 + h * split_.A.symbols[i]);
      phi_[i] = h;
    }
  }
  dw_.resize(fam.size());
  uv_ = VectorField(basis.grid_points(GridLevel::padded), GridLevel::padded);
  wv_ = uv_;
  cub_ = SpectralField(m);
  h_ = cub_;
  f_ = cub_;
  tmp_ = cub_;
  noise_ = cub_;
}

void Stepper::mask(SpectralField& f) const {
  for (int c = 0; c < 3; ++c) {
    auto x = f.comp(c);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!keep_[i]) x[i] = 0.0;
  }
}

namespace {

void cross_into(const VectorField& a, VectorField& b) {
  for (std::size_t i = 0; i < a.points(); ++i) b.set(i, cross(a.at(i), b.at(i)));
}

}  // namespace

const SpectralField& Stepper::drift(const SpectralField& u) {
  basis_.to_grid(u, uv_);
  for (std::size_t i = 0; i < uv_.points(); ++i) {
    const Vec3 v = uv_.at(i);
    const double s = dot(v, v);
    wv_.set(i, {s * v[0], s * v[1], s * v[2]});
  }
  basis_.to_modes(wv_, cub_);
  for (int c = 0; c < 3; ++c) {
    auto hc = h_.comp(c);
    auto uc = u.comp(c);
    auto cc = cub_.comp(c);
    auto fc = f_.comp(c);
    for (std::size_t i = 0; i < hc.size(); ++i) {
      const double mu = basis_.eigenvalue(i);
      hc[i] = keep_[i] ? (-p_.alpha * mu + p_.kappa1) * uc[i] - p_.kappa2 * cc[i] : 0.0;
      fc[i] = (p_.lambda_r + p_.lambda_e * mu) * hc[i];
    }
  }
  if (p_.gamma != 0.0) {
    basis_.to_grid(h_, wv_);
    cross_into(uv_, wv_);
    basis_.to_modes(wv_, tmp_);
    tmp_ *= p_.gamma;
    f_ -= tmp_;
  }
  if (p_.has_torque()) f_ += projected_s_total(basis_, u, p_);
  mask(f_);
  return f_;
}

void Stepper::noise_term(std::span<const double> dW, SpectralField& out) {
  out.fill(0.0);
  bool any_h = false;
  for (int k = 0; k < fam_.size(); ++k) {
    const auto& g = fam_.g[k];
    out.comp(g.axis)[g.mode] += g.amplitude * dW[k];
    any_h = any_h || fam_.h[k].amplitude != 0.0;
  }
  if (p_.gamma != 0.0 && any_h) {
    tmp_.fill(0.0);
    for (int k = 0; k < fam_.size(); ++k) {
      const auto& h = fam_.h[k];
      tmp_.comp(h.axis)[h.mode] += h.amplitude * dW[k];
    }
    basis_.to_grid(tmp_, wv_);
    cross_into(uv_, wv_);  // uv_ still holds u from drift()
    basis_.to_modes(wv_, tmp_);
    tmp_ *= p_.gamma;
    out += tmp_;
  }
  mask(out);
}

void Stepper::step(TrajectoryState& state, const NoisePath& path) {
  path.sample_increments(state.step, dw_);
  step(state, dw_);
}

void Stepper::step(TrajectoryState& state, std::span<const double> dW) {
  if (static_cast<int>(dW.size()) != fam_.size())
    throw ConfigError("increment count does not match the noise family size");
  SpectralField& u = state.u;
  drift(u);
  noise_term(dW, noise_);
  const auto& a = split_.A.symbols;
  const auto& l = split_.full_symbol;
  for (int c = 0; c < 3; ++c) {
    auto uc = u.comp(c);
    auto fc = f_.comp(c);
    auto nc = noise_.comp(c);
    for (std::size_t i = 0; i < uc.size(); ++i) {
      if (!keep_[i]) {
        uc[i] = 0.0;
      } else if (cfg_.scheme == Scheme::exponential_euler) {
        uc[i] = prop_[i] * (uc[i] + nc[i]) + phi_[i] * (fc[i] - l[i] * uc[i]);
      } else {
        uc[i] = prop_[i] * (uc[i] + phi_[i] * (fc[i] + a[i] * uc[i]) + nc[i]);
      }
    }
  }
  ++state.step;
  state.t = static_cast<double>(state.step) * cfg_.dt;
  if (!u.all_finite()) throw BlowUpError(state.step, state.t);
}

SpectralField drift(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p, int n) {
  const NoiseFamily none;
  SchemeConfig cfg;
  cfg.n = n;
  Stepper s(basis, p, none, cfg);
  return s.drift(u);
}

SpectralField remainder(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        const OperatorA& A, int n) {
  SpectralField r = drift(basis, u, p, n);
  const SpectralField un = project(basis, u, n < 0 ? basis.max_cutoff() : n);
  for (int c = 0; c < 3; ++c) {
    auto rc = r.comp(c);
    auto uc = un.comp(c);
    for (std::size_t i = 0; i < rc.size(); ++i) rc[i] += A.symbols[i] * uc[i];
  }
  return r;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void add(double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
};

}  // namespace

IntegrationResult integrate(const SpectralBasis& basis, const SpectralField& u0, const SchemeConfig& cfg,
                            const ModelParams& p, const NoiseFamily& fam, const NoisePath& path,
                            const StateSink& sink) {
  cfg.validate(basis);
  p.validate();
  if (u0.modes() != basis.mode_count()) throw ConfigError("initial data does not match the basis size");

  IntegrationResult res;
  res.state.u = project(basis, u0, cfg.cutoff(basis));
  if (sink) sink(res.state);
  const std::uint64_t steps = cfg.step_count();
  if (steps == 0) return res;

  Stepper st(basis, p, fam, cfg);
  std::vector<double> dw(fam.size());
  Fnv1a sum;
  for (std::uint64_t s = 0; s < steps; ++s) {
    path.sample_increments(s, dw);
    for (double x : dw) sum.add(x);
    st.step(res.state, dw);
    if (sink && (res.state.step % cfg.record_every == 0 || res.state.step == steps)) sink(res.state);
  }
  res.noise_checksum = sum.h;
  return res;
}

}  // namespace llbar
