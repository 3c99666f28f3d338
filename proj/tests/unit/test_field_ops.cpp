#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "llbar/error.hpp"
#include "llbar/field_ops.hpp"
#include "test_util.hpp"

using namespace llbar;
using namespace llbar::testing;

namespace {

VectorField constant_nodal(const SpectralBasis& b, const Vec3& c, GridLevel lv = GridLevel::native) {
  VectorField f(b.grid_points(lv), lv);
  for (std::size_t i = 0; i < f.points(); ++i) f.set(i, c);
  return f;
}

SpectralField constant_field(const SpectralBasis& b, const Vec3& c) {
  return forward_transform(b, constant_nodal(b, c));
}

double rel_diff(const VectorField& a, const VectorField& b) {
  double n = 0.0, d = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) {
    n += (a.raw()[i] - b.raw()[i]) * (a.raw()[i] - b.raw()[i]);
    d += b.raw()[i] * b.raw()[i];
  }
  return std::sqrt(n / d);
}

}  // namespace

TEST(ModelParams, ValidateRejectsOutOfRange) {
  ModelParams ok;
  EXPECT_NO_THROW(ok.validate());
  auto bad = [&](auto mutate) {
    ModelParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), ConfigError);
  };
  bad([](ModelParams& p) { p.lambda_r = 0.0; });
  bad([](ModelParams& p) { p.lambda_e = -0.1; });
  bad([](ModelParams& p) { p.alpha = 0.0; });
  bad([](ModelParams& p) { p.kappa1 = 0.5; });
  bad([](ModelParams& p) { p.kappa2 = -1.0; });
  bad([](ModelParams& p) { p.gamma = -1.0; });
  bad([](ModelParams& p) { p.beta1 = std::nan(""); });
  bad([](ModelParams& p) { p.L.M(0, 0) = INFINITY; });
  ModelParams llb;
  llb.lambda_e = 0.0;
  EXPECT_NO_THROW(llb.validate());
}

TEST(AffineMap, OperatorNormIsLargestSingularValue) {
  AffineMap L;
  L.M = Eigen::Vector3d(3.0, -5.0, 1.0).asDiagonal();
  EXPECT_NEAR(L.operator_norm(), 5.0, 1e-14);
  EXPECT_TRUE(AffineMap{}.is_zero());
}

TEST(EffectiveField, ZeroAndConstantFields) {
  const auto b = basis_2d(1.0, 1.0, 8, 4);
  ModelParams p;
  const SpectralField zero(b.mode_count());
  EXPECT_EQ(max_abs(effective_field(b, zero, p)), 0.0);
  const Vec3 c{0.3, -0.7, 0.5};
  const auto H = inverse_transform(b, effective_field(b, constant_field(b, c), p));
  const double s = dot(c, c);
  for (std::size_t i = 0; i < H.points(); ++i)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(H.at(i)[k], c[k] - s * c[k], 1e-14);
}

TEST(EffectiveField, SingleModeAgainstPointwiseFormula) {
  const auto b = basis_1d(1.0, 32, 8);
  ModelParams p;
  p.alpha = 0.8;
  p.kappa1 = -1.0;
  p.kappa2 = 1.7;
  const double a = 0.9;
  const std::size_t k = 2;  // 3k <= n, so the projected cubic is exact
  SpectralField u(b.mode_count());
  u.comp(1)[k] = a;
  const auto H = effective_field(b, u, p);
  const double mu = b.eigenvalue(k);
  for (double x : {0.01, 0.23, 0.5, 0.77, 0.99}) {
    const double xs[1] = {x};
    const double e = b.basis_function(k, xs);
    const double expect = (-p.alpha * mu + p.kappa1) * a * e - p.kappa2 * a * a * a * e * e * e;
    const Vec3 h = dense_eval(b, H, xs);
    EXPECT_NEAR(h[1], expect, 1e-11 * std::abs(mu));
    EXPECT_NEAR(h[0], 0.0, 1e-12);
  }
  const auto nodal = effective_field_nodal(b, u, p);
  const auto xg = b.grid_coordinates(GridLevel::native, 0);
  for (std::size_t i = 0; i < nodal.points(); ++i) {
    const double xs[1] = {xg[i]};
    const double e = b.basis_function(k, xs);
    EXPECT_NEAR(nodal.at(i)[1], (-p.alpha * mu + p.kappa1) * a * e - p.kappa2 * a * a * a * e * e * e,
                1e-11 * std::abs(mu));
  }
}

TEST(EffectiveField, IsOdd) {
  const auto b = basis_1d(1.0, 32, 16);
  const auto u = random_coeffs(b, 16, 3);
  ModelParams p;
  const auto plus = effective_field(b, u, p);
  const auto minus = effective_field(b, -1.0 * u, p);
  EXPECT_LT(max_abs_diff(plus, -1.0 * minus), 1e-12 * max_abs(plus));
}

TEST(LaplacianCubic, ConstantFieldGivesZero) {
  const auto b = basis_1d(1.0, 16, 8);
  const auto lc = laplacian_cubic(b, constant_field(b, {0.4, 0.1, -0.2}));
  EXPECT_LT(max_abs(lc), 1e-12);
}

TEST(LaplacianCubic, VectorIdentityOnRandomFields) {
  for (int d : {1, 2}) {
    const auto b = d == 1 ? basis_1d(1.3, 64, 30) : basis_2d(1.0, 0.6, 32, 15);
    for (std::uint64_t s = 0; s < 4; ++s) {
      const auto u = random_coeffs(b, 30, 10 + s);
      EXPECT_LT(rel_diff(laplacian_cubic_expanded(b, u), laplacian_cubic(b, u)), 1e-8);
    }
  }
}

TEST(SpinTorque, VanishesWithoutCurrentOrGradient) {
  const auto b = basis_1d(1.0, 16, 8);
  ModelParams p;
  p.beta1 = 1.0;
  p.beta2 = 1.0;
  EXPECT_EQ(max_abs(spin_torque(b, random_coeffs(b, 8, 1), p)), 0.0);
  p.nu = {1.0, 0.0, 0.0};
  EXPECT_LT(max_abs(spin_torque(b, constant_field(b, {1.0, 2.0, 3.0}), p)), 1e-12);
}

TEST(SpinTorque, MatchesFiniteDifferenceOracle) {
  const auto b = basis_1d(1.0, 16, 8);
  ModelParams p;
  p.nu = {1.0, 0.0, 0.0};
  p.beta1 = 0.7;
  p.beta2 = -1.3;
  SpectralField u(b.mode_count());
  u.comp(0)[1] = 0.8;
  u.comp(1)[2] = 0.5;
  u.comp(2)[0] = 0.3;
  const auto R = spin_torque(b, u, p);
  const auto xg = b.grid_coordinates(GridLevel::native, 0);
  const double h = 1e-4;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xg.size(); ++i) {
    const double x[1] = {xg[i]}, xp[1] = {xg[i] + h}, xm[1] = {xg[i] - h};
    const Vec3 v = dense_eval(b, u, x);
    const Vec3 vp = dense_eval(b, u, xp), vm = dense_eval(b, u, xm);
    Vec3 dv;
    for (int c = 0; c < 3; ++c) dv[c] = (vp[c] - vm[c]) / (2 * h);
    const Vec3 x_ = cross(v, dv);
    for (int c = 0; c < 3; ++c) {
      const double fd = p.beta1 * dv[c] + p.beta2 * x_[c];
      num += (fd - R.at(i)[c]) * (fd - R.at(i)[c]);
      den += fd * fd;
    }
  }
  EXPECT_LT(std::sqrt(num / den), 1e-3);
}

TEST(STotal, IdentityTorqueZeroAndLinearity) {
  const auto b = basis_1d(1.0, 16, 8);
  const auto u = random_coeffs(b, 8, 2);
  ModelParams p;
  p.L.M = Eigen::Matrix3d::Identity();
  EXPECT_LT(rel_diff(s_total(b, u, p), inverse_transform(b, u)), 1e-15);
  ModelParams none;
  EXPECT_EQ(max_abs(s_total(b, u, none)), 0.0);
  EXPECT_FALSE(none.has_torque());

  ModelParams both;
  both.nu = {0.6, 0, 0};
  both.beta1 = 0.5;
  both.beta2 = 0.2;
  both.L.M << 0.1, 0.2, 0.0, -0.3, 0.0, 0.4, 0.0, 0.1, 0.2;
  both.L.b << 0.3, -0.1, 0.05;
  const auto total = s_total(b, u, both);
  auto parts = spin_torque(b, u, both);
  const auto uv = inverse_transform(b, u);
  for (std::size_t i = 0; i < parts.points(); ++i) {
    const Vec3 l = both.L(uv.at(i));
    Vec3 r = parts.at(i);
    for (int c = 0; c < 3; ++c) r[c] += l[c];
    parts.set(i, r);
  }
  EXPECT_LT(rel_diff(total, parts), 1e-15);
}

TEST(STotal, ProjectedAffinePartIsExact) {
  const auto b = basis_2d(1.0, 2.0, 8, 5);
  const auto u = random_coeffs(b, 5, 3);
  ModelParams p;
  p.L.M << 0.1, 0.2, 0.0, -0.3, 0.0, 0.4, 0.0, 0.1, 0.2;
  p.L.b << 0.3, -0.1, 0.05;
  // Affine image of a band-limited field is band-limited, so projection is a forward transform.
  const auto expect = forward_transform(b, s_total(b, u, p));
  EXPECT_LT(max_abs_diff(projected_s_total(b, u, p), expect), 1e-13);
}

TEST(Norms, ConstantUnitFieldAndSingleMode) {
  const auto b = basis_2d(1.0, 1.0, 8, 4);
  const auto n = norms(b, constant_field(b, {1.0, 0.0, 0.0}));
  EXPECT_NEAR(n.l2, 1.0, 1e-14);
  EXPECT_NEAR(n.l4, 1.0, 1e-14);
  EXPECT_NEAR(n.linf, 1.0, 1e-14);
  EXPECT_NEAR(n.grad, 0.0, 1e-14);
  SpectralField e(b.mode_count());
  e.comp(0)[1] = 1.0;
  const auto m = norms(b, e);
  EXPECT_NEAR(m.l2, 1.0, 1e-14);
  EXPECT_NEAR(m.grad * m.grad, b.eigenvalue(1), 1e-12);
}

TEST(Norms, L4AgainstDenseQuadrature) {
  const double L = 1.7;
  const auto b = basis_1d(L, 32, 12);
  const auto u = random_coeffs(b, 12, 6);
  // Midpoint rule with M > 2 * 12 nodes is exact for |u|^4.
  const int M = 200;
  double s = 0.0;
  for (int i = 0; i < M; ++i) {
    const double x[1] = {(i + 0.5) * L / M};
    const Vec3 v = dense_eval(b, u, x);
    s += dot(v, v) * dot(v, v);
  }
  s *= L / M;
  const double l4 = norms(b, u).l4;
  EXPECT_NEAR(l4 * l4 * l4 * l4 / s, 1.0, 1e-12);
}

TEST(Psi, ZeroConstantAndGradientConsistency) {
  const auto b = basis_1d(1.0, 32, 16);
  ModelParams p;
  EXPECT_EQ(energy_psi(b, SpectralField(b.mode_count()), p), 0.0);
  const Vec3 c{0.6, 0.2, -0.4};
  const double s = dot(c, c);
  EXPECT_NEAR(energy_psi(b, constant_field(b, c), p), 0.25 * s * s - 0.5 * s, 1e-14);

  p.alpha = 0.9;
  p.kappa2 = 1.4;
  const auto u = random_coeffs(b, 16, 1);
  const auto h = random_coeffs(b, 16, 2);
  const double exact = -inner(effective_field(b, u, p), h);
  double prev = 0.0;
  for (double eps : {1e-2, 5e-3, 2.5e-3}) {
    const double fd = (energy_psi(b, u + eps * h, p) - energy_psi(b, u - eps * h, p)) / (2 * eps);
    const double err = std::abs(fd - exact);
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.2);
    prev = err;
  }
}

TEST(CrossProduct, PairingWithStateVanishes) {
  const auto b = basis_2d(1.0, 1.0, 16, 8);
  const auto u = random_coeffs(b, 8, 5);
  ModelParams p;
  auto uv = inverse_transform(b, u, GridLevel::padded);
  auto hv = inverse_transform(b, effective_field(b, u, p), GridLevel::padded);
  for (std::size_t i = 0; i < hv.points(); ++i) hv.set(i, cross(uv.at(i), hv.at(i)));
  EXPECT_LT(std::abs(nodal_inner(b, hv, uv)), 1e-13);
}

TEST(H2Norm, SumOfL2GradientAndLaplacianNorms) {
  const auto b = basis_1d(1.0, 32, 16);
  const auto u = random_coeffs(b, 16, 7);
  const auto n = norms(b, u);
  EXPECT_NEAR(h2_norm_sq(b, u), n.l2 * n.l2 + n.grad * n.grad + n.lap * n.lap, 1e-12 * h2_norm_sq(b, u));
}
