#include "llbar/selftest.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "llbar/integrator.hpp"
#include "llbar/noise.hpp"

namespace llbar {

bool SelftestReport::pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

SpectralField random_field(const SpectralBasis& basis, int n, std::uint64_t seed, std::uint64_t id) {
  SpectralField u(basis.mode_count());
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    const auto& k = basis.mode(i);
    double k2 = 0.0;
    bool inside = true;
    for (int a = 0; a < basis.dim(); ++a) {
      inside = inside && k[a] <= n;
      k2 += static_cast<double>(k[a]) * k[a];
    }
    if (!inside) continue;
    for (int c = 0; c < 3; ++c)
      u.comp(c)[i] = counter_normal(seed, id, i, static_cast<std::uint32_t>(c)) / (1.0 + k2);
  }
  return u;
}

ModelParams pairing_params(int dim) {
  ModelParams p;
  p.lambda_r = 1.0;
  p.lambda_e = 0.7;
  p.gamma = 0.9;
  p.alpha = 1.1;
  p.kappa1 = 1.0;
  p.kappa2 = 1.3;
  p.beta1 = 0.4;
  p.beta2 = 0.3;
  p.nu = {0.5, dim > 1 ? -0.2 : 0.0, dim > 2 ? 0.1 : 0.0};
  p.L.M << 0.2, -0.1, 0.0, 0.05, 0.1, 0.3, 0.0, -0.2, 0.15;
  p.L.b << 0.1, 0.0, -0.05;
  return p;
}

double pairing_residual(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        const ModelParams& drift_params) {
  const SpectralField F = drift(basis, u, drift_params, -1);
  const SpectralField H = effective_field(basis, u, p);
  const double lhs = inner(F, H);
  const VectorField s = s_total(basis, u, p, GridLevel::padded);
  const VectorField h = inverse_transform(basis, H, GridLevel::padded);
  const double sh = nodal_inner(basis, s, h);
  const double hh = inner(H, H);
  const double gh = grad_norm_sq(basis, H);
  const double rhs = p.lambda_r * hh + p.lambda_e * gh + sh;
  const double scale = std::abs(p.lambda_r * hh) + std::abs(p.lambda_e * gh) + std::abs(sh);
  return std::abs(lhs - rhs) / scale;
}

namespace {

struct Case {
  int dim;
  int points;
  int cutoff;
};

double rel_l2(const VectorField& a, const VectorField& b) {
  double num = 0.0, den = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - y[i]) * (x[i] - y[i]);
    den += x[i] * x[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

SelftestReport run_selftest(const SelftestOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  SelftestReport rep;
  const std::array<Case, 2> cases{Case{1, 128, 64}, Case{2, 64, 32}};
  const std::array<double, 3> eps{0.1, 1.0, 10.0};

  for (const Case& cs : cases) {
    const std::vector<double> lengths(cs.dim, 1.0);
    const std::vector<double> lengths_alt{1.0, 1.7};
    const std::vector<int> pts(cs.dim, cs.points);
    const std::vector<int> cut(cs.dim, cs.cutoff);
    const BoxDomain dom = BoxDomain::make(cs.dim == 1 ? std::span<const double>(lengths) : lengths_alt, pts);
    const SpectralBasis basis = build_basis(dom, cut);
    const ModelParams p = pairing_params(cs.dim);
    ModelParams pd = p;
    if (opt.flip_field_sign) {
      pd.alpha = -pd.alpha;
      pd.kappa1 = -pd.kappa1;
      pd.kappa2 = -pd.kappa2;
    }
    const OperatorA A = make_operator_a(basis, p.lambda_r, p.lambda_e);

    double lap_cubic = 0.0, interp = 0.0, pairing = 0.0, parseval = 0.0, semigroup = 0.0;
    for (int f = 0; f < opt.fields; ++f) {
      const SpectralField v = random_field(basis, cs.cutoff, opt.seed, 1000u * cs.dim + f);

      lap_cubic = std::max(lap_cubic, rel_l2(laplacian_cubic(basis, v), laplacian_cubic_expanded(basis, v)));

      const double l2 = inner(v, v);
      const double g2 = grad_norm_sq(basis, v);
      const double d2 = lap_norm_sq(basis, v);
      for (double e : eps) {
        const double bound = l2 / (4.0 * e) + e * d2;
        interp = std::max(interp, (g2 - bound) / bound);
      }

      pairing = std::max(pairing, pairing_residual(basis, v, p, pd));

      const VectorField nodal = inverse_transform(basis, v);
      const double quad = nodal_inner(basis, nodal, nodal);
      parseval = std::max(parseval, std::abs(quad - l2) / l2);

      const double s = 1e-6 * (1 + f % 5), t = 2.5e-6 * (1 + f % 3);
      const SpectralField two = apply_semigroup(basis, apply_semigroup(basis, v, s, A), t, A);
      const SpectralField one = apply_semigroup(basis, v, s + t, A);
      double vmax = 0.0, dmax = 0.0;
      for (std::size_t i = 0; i < v.raw().size(); ++i) {
        vmax = std::max(vmax, std::abs(v.raw()[i]));
        dmax = std::max(dmax, std::abs(two.raw()[i] - one.raw()[i]));
      }
      semigroup = std::max(semigroup, dmax / vmax);
    }
    const std::string tag = "d" + std::to_string(cs.dim) + " ";
    rep.checks.push_back({tag + "laplacian of cubic expansion", lap_cubic, 1e-8, lap_cubic < 1e-8});
    rep.checks.push_back({tag + "interpolation inequality (eps = 0.1, 1, 10)", std::max(interp, 0.0), 0.0,
                          interp <= 1e-14});
    rep.checks.push_back({tag + "drift-field pairing", pairing, 1e-8, pairing < 1e-8});
    rep.checks.push_back({tag + "Parseval", parseval, 1e-12, parseval < 1e-12});
    rep.checks.push_back({tag + "semigroup composition", semigroup, 1e-12, semigroup < 1e-12});
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace llbar
