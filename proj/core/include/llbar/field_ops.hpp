#pragma once

#include <Eigen/Core>

#include <array>

#include "llbar/field.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

/// Pointwise affine torque L(v) = M v + b.
struct AffineMap {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();

  Vec3 operator()(const Vec3& v) const {
    const Eigen::Vector3d r = M * Eigen::Vector3d(v[0], v[1], v[2]) + b;
    return {r[0], r[1], r[2]};
  }
  /// Lipschitz constant: spectral norm of M.
  double operator_norm() const;
  bool is_zero() const { return M.isZero(0.0) && b.isZero(0.0); }
};

/// Coefficients of the stochastic LLBar system.
struct ModelParams {
  double lambda_r = 1.0;
  double lambda_e = 1.0;  ///< zero selects the LLB equation
  double gamma = 1.0;
  double alpha = 1.0;
  double kappa1 = 1.0;  ///< +1 below the Curie temperature, -1 above
  double kappa2 = 1.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::array<double, 3> nu{0.0, 0.0, 0.0};  ///< constant spin current, first d entries used
  AffineMap L;

  /// Throws ConfigError on any violated sign or range constraint.
  void validate() const;
  bool has_spin_current() const { return nu[0] != 0.0 || nu[1] != 0.0 || nu[2] != 0.0; }
  bool has_torque() const { return (has_spin_current() && (beta1 != 0.0 || beta2 != 0.0)) || !L.is_zero(); }
};

struct Norms {
  double l2 = 0.0;
  double l4 = 0.0;
  double l6 = 0.0;
  double grad = 0.0;  ///< ||grad u||_L2
  double lap = 0.0;   ///< ||Delta u||_L2
  double linf = 0.0;
};

/// Galerkin effective field H_n = alpha Delta u + kappa1 u - kappa2 Pi_n(|u|^2 u),
/// with the cubic projected exactly through the padded grid.
SpectralField effective_field(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p);

/// Unprojected pointwise H = alpha Delta u + kappa1 u - kappa2 |u|^2 u on a grid.
VectorField effective_field_nodal(const SpectralBasis& basis, const SpectralField& u,
                                  const ModelParams& p, GridLevel level = GridLevel::native);

/// |u|^2 u evaluated at the nodes of `level`.
VectorField cubic(const SpectralBasis& basis, const SpectralField& u, GridLevel level = GridLevel::padded);
/// Pi_n(|u|^2 u), exact for u in the basis span.
SpectralField projected_cubic(const SpectralBasis& basis, const SpectralField& u);

/// Delta(|u|^2 u) on the padded grid, from the spectral Laplacian of the full
/// (unprojected) cubic. Exact when 3 n_j < 2 N_j.
VectorField laplacian_cubic(const SpectralBasis& basis, const SpectralField& u);

/// Right-hand side of the vector identity
/// Delta(|v|^2 v) = 2|grad v|^2 v + 2(v.Delta v) v + 4 grad v (v.grad v)^T + |v|^2 Delta v,
/// assembled pointwise on the padded grid from spectral first derivatives and Delta v.
VectorField laplacian_cubic_expanded(const SpectralBasis& basis, const SpectralField& u);

/// Nodal gradient: one VectorField per axis holding d u / d x_axis.
std::vector<VectorField> gradient(const SpectralBasis& basis, const SpectralField& u,
                                  GridLevel level = GridLevel::padded);

/// R(u) = beta1 (nu.grad) u + beta2 u x (nu.grad) u at the nodes of `level`.
VectorField spin_torque(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        GridLevel level = GridLevel::native);
/// S(u) = R(u) + L(u) at the nodes of `level`.
VectorField s_total(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                    GridLevel level = GridLevel::native);
/// Pi_n S(u): the spin-current part is projected by padded-grid quadrature,
/// the affine part exactly in coefficient space.
SpectralField projected_s_total(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p);

/// L2 by Parseval, L4/L6/Linf by midpoint quadrature on the padded grid
/// (exact for L4 on band-limited fields), derivative norms spectrally.
Norms norms(const SpectralBasis& basis, const SpectralField& u);

/// Quadrature inner product of two nodal fields living on the same grid.
double nodal_inner(const SpectralBasis& basis, const VectorField& a, const VectorField& b);

/// psi(u) = alpha/2 ||grad u||^2 + kappa2/4 ||u||_L4^4 - kappa1/2 ||u||^2.
/// Its Gateaux derivative in direction h is <-H(u), h>.
double energy_psi(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p);
double energy_psi(const Norms& n, const ModelParams& p);

/// ||u||_{H^2}^2 = ||u||^2 + ||grad u||^2 + ||D^2 u||^2 = sum (1 + mu + mu^2) |u_k|^2.
double h2_norm_sq(const SpectralBasis& basis, const SpectralField& u);

}  // namespace llbar
