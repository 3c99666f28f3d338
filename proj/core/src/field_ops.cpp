#include "llbar/field_ops.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "llbar/error.hpp"

namespace llbar {

double AffineMap::operator_norm() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M);
  return svd.singularValues()(0);
}

void ModelParams::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(lambda_r > 0.0) || !finite(lambda_r)) throw ConfigError("lambda_r must be positive");
  if (!(lambda_e >= 0.0) || !finite(lambda_e)) throw ConfigError("lambda_e must be nonnegative");
  if (!(gamma >= 0.0) || !finite(gamma)) throw ConfigError("gamma must be nonnegative");
  if (!(alpha > 0.0) || !finite(alpha)) throw ConfigError("alpha must be positive");
  if (kappa1 != 1.0 && kappa1 != -1.0) throw ConfigError("kappa1 must be +1 or -1");
  if (!(kappa2 >= 0.0) || !finite(kappa2)) throw ConfigError("kappa2 must be nonnegative");
  if (!finite(beta1) || !finite(beta2)) throw ConfigError("beta1/beta2 must be finite");
  for (double v : nu)
    if (!finite(v)) throw ConfigError("spin current must be finite");
  if (!L.M.allFinite() || !L.b.allFinite()) throw ConfigError("affine torque must be finite");
}

VectorField cubic(const SpectralBasis& basis, const SpectralField& u, GridLevel level) {
  VectorField out(basis.grid_points(level), level);
  basis.to_grid(u, out);
  for (std::size_t i = 0; i < out.points(); ++i) {
    const Vec3 v = out.at(i);
    const double s = dot(v, v);
    out.set(i, {s * v[0], s * v[1], s * v[2]});
  }
  return out;
}

SpectralField projected_cubic(const SpectralBasis& basis, const SpectralField& u) {
  VectorField c = cubic(basis, u, GridLevel::padded);
  SpectralField out(basis.mode_count());
  basis.to_modes(c, out);
  return out;
}

SpectralField effective_field(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p) {
  SpectralField h = projected_cubic(basis, u);
  for (int c = 0; c < 3; ++c) {
    auto hc = h.comp(c);
    auto uc = u.comp(c);
    for (std::size_t i = 0; i < hc.size(); ++i)
      hc[i] = (-p.alpha * basis.eigenvalue(i) + p.kappa1) * uc[i] - p.kappa2 * hc[i];
  }
  return h;
}

VectorField effective_field_nodal(const SpectralBasis& basis, const SpectralField& u,
                                  const ModelParams& p, GridLevel level) {
  VectorField uv(basis.grid_points(level), level);
  basis.to_grid(u, uv);
  VectorField lap(basis.grid_points(level), level);
  basis.to_grid(apply_laplacian(basis, u), lap);
  VectorField out(basis.grid_points(level), level);
  for (std::size_t i = 0; i < out.points(); ++i) {
    const Vec3 v = uv.at(i);
    const Vec3 l = lap.at(i);
    const double s = dot(v, v);
    Vec3 h;
    for (int c = 0; c < 3; ++c) h[c] = p.alpha * l[c] + p.kappa1 * v[c] - p.kappa2 * s * v[c];
    out.set(i, h);
  }
  return out;
}

VectorField laplacian_cubic(const SpectralBasis& basis, const SpectralField& u) {
  VectorField c = cubic(basis, u, GridLevel::padded);
  for (int k = 0; k < 3; ++k) basis.grid_laplacian(c.comp(k), GridLevel::padded);
  return c;
}

std::vector<VectorField> gradient(const SpectralBasis& basis, const SpectralField& u, GridLevel level) {
  std::vector<VectorField> g;
  g.reserve(basis.dim());
  for (int a = 0; a < basis.dim(); ++a) {
    VectorField d(basis.grid_points(level), level);
    for (int c = 0; c < 3; ++c) basis.derivative_to_grid(u.comp(c), a, d.comp(c), level);
    g.push_back(std::move(d));
  }
  return g;
}

VectorField laplacian_cubic_expanded(const SpectralBasis& basis, const SpectralField& u) {
  const GridLevel lv = GridLevel::padded;
  VectorField v = inverse_transform(basis, u, lv);
  VectorField lap = inverse_transform(basis, apply_laplacian(basis, u), lv);
  const auto grad = gradient(basis, u, lv);
  VectorField out(v.points(), lv);
  for (std::size_t i = 0; i < v.points(); ++i) {
    const Vec3 vi = v.at(i);
    const Vec3 li = lap.at(i);
    double grad_sq = 0.0;
    Vec3 mixed{0.0, 0.0, 0.0};
    for (const auto& g : grad) {
      const Vec3 dj = g.at(i);
      grad_sq += dot(dj, dj);
      const double vd = dot(vi, dj);
      for (int c = 0; c < 3; ++c) mixed[c] += dj[c] * vd;
    }
    const double vl = dot(vi, li);
    const double vv = dot(vi, vi);
    Vec3 r;
    for (int c = 0; c < 3; ++c)
      r[c] = 2.0 * grad_sq * vi[c] + 2.0 * vl * vi[c] + 4.0 * mixed[c] + vv * li[c];
    out.set(i, r);
  }
  return out;
}

namespace {

// (nu . grad) u at the nodes of `level`.
VectorField advective_derivative(const SpectralBasis& basis, const SpectralField& u,
                                 const ModelParams& p, GridLevel level) {
  VectorField out(basis.grid_points(level), level);
  VectorField d(basis.grid_points(level), level);
  for (int a = 0; a < basis.dim(); ++a) {
    if (p.nu[a] == 0.0) continue;
    for (int c = 0; c < 3; ++c) {
      basis.derivative_to_grid(u.comp(c), a, d.comp(c), level);
      auto o = out.comp(c);
      auto dc = d.comp(c);
      for (std::size_t i = 0; i < o.size(); ++i) o[i] += p.nu[a] * dc[i];
    }
  }
  return out;
}

void add_spin_torque(const VectorField& uv, const VectorField& du, const ModelParams& p, VectorField& out) {
  for (std::size_t i = 0; i < out.points(); ++i) {
    const Vec3 v = uv.at(i);
    const Vec3 g = du.at(i);
    const Vec3 x = cross(v, g);
    Vec3 r = out.at(i);
    for (int c = 0; c < 3; ++c) r[c] += p.beta1 * g[c] + p.beta2 * x[c];
    out.set(i, r);
  }
}

}  // namespace

VectorField spin_torque(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        GridLevel level) {
  VectorField out(basis.grid_points(level), level);
  if (!p.has_spin_current()) return out;
  VectorField uv = inverse_transform(basis, u, level);
  VectorField du = advective_derivative(basis, u, p, level);
  add_spin_torque(uv, du, p, out);
  return out;
}

VectorField s_total(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                    GridLevel level) {
  VectorField out = spin_torque(basis, u, p, level);
  if (p.L.is_zero()) return out;
  VectorField uv = inverse_transform(basis, u, level);
  for (std::size_t i = 0; i < out.points(); ++i) {
    const Vec3 l = p.L(uv.at(i));
    Vec3 r = out.at(i);
    for (int c = 0; c < 3; ++c) r[c] += l[c];
    out.set(i, r);
  }
  return out;
}

SpectralField projected_s_total(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p) {
  SpectralField out(basis.mode_count());
  if (p.has_spin_current() && (p.beta1 != 0.0 || p.beta2 != 0.0)) {
    VectorField r = spin_torque(basis, u, p, GridLevel::padded);
    basis.to_modes(r, out);
  }
  if (!p.L.is_zero()) {
    for (std::size_t i = 0; i < basis.mode_count(); ++i) {
      const Eigen::Vector3d m = p.L.M * Eigen::Vector3d(u.comp(0)[i], u.comp(1)[i], u.comp(2)[i]);
      for (int c = 0; c < 3; ++c) out.comp(c)[i] += m[c];
    }
    // The constant b projects onto e_0 = 1/sqrt(|D|) only.
    const double root_vol = std::sqrt(basis.domain().volume());
    for (int c = 0; c < 3; ++c) out.comp(c)[0] += p.L.b[c] * root_vol;
  }
  return out;
}

Norms norms(const SpectralBasis& basis, const SpectralField& u) {
  Norms n;
  n.l2 = std::sqrt(inner(u, u));
  n.grad = std::sqrt(grad_norm_sq(basis, u));
  n.lap = std::sqrt(lap_norm_sq(basis, u));
  VectorField v = inverse_transform(basis, u, GridLevel::padded);
  const double w = basis.cell_volume(GridLevel::padded);
  double s4 = 0.0;
  double s6 = 0.0;
  double mx = 0.0;
  for (std::size_t i = 0; i < v.points(); ++i) {
    const Vec3 x = v.at(i);
    const double s = dot(x, x);
    s4 += s * s;
    s6 += s * s * s;
    mx = std::max(mx, s);
  }
  n.l4 = std::pow(s4 * w, 0.25);
  n.l6 = std::pow(s6 * w, 1.0 / 6.0);
  n.linf = std::sqrt(mx);
  return n;
}

double nodal_inner(const SpectralBasis& basis, const VectorField& a, const VectorField& b) {
  if (a.points() != b.points() || a.level() != b.level())
    throw ConfigError("nodal_inner: fields live on different grids");
  double s = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s * basis.cell_volume(a.level());
}

double energy_psi(const Norms& n, const ModelParams& p) {
  const double l4sq = n.l4 * n.l4;
  return 0.5 * p.alpha * n.grad * n.grad + 0.25 * p.kappa2 * l4sq * l4sq - 0.5 * p.kappa1 * n.l2 * n.l2;
}

double energy_psi(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p) {
  return energy_psi(norms(basis, u), p);
}

double h2_norm_sq(const SpectralBasis& basis, const SpectralField& u) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto x = u.comp(c);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double mu = basis.eigenvalue(i);
      s += (1.0 + mu + mu * mu) * x[i] * x[i];
    }
  }
  return s;
}

}  // namespace llbar
