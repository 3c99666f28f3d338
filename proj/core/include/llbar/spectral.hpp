#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "llbar/field.hpp"

namespace llbar {

inline constexpr int kMaxDim = 3;

using MultiIndex = std::array<int, kMaxDim>;

/// Rectangular box [0,L_1] x ... x [0,L_d] with N_j midpoint collocation
/// points per axis, x_i = (i + 1/2) L_j / N_j.
struct BoxDomain {
  int dim = 1;
  std::array<double, kMaxDim> lengths{1.0, 1.0, 1.0};
  std::array<int, kMaxDim> points{4, 1, 1};

  /// Throws ConfigError unless lengths are positive and every N_j is even and >= 4.
  static BoxDomain make(std::span<const double> lengths, std::span<const int> points);

  void validate() const;
  std::size_t point_count() const;
  double volume() const;
};

/// Stiff positive part A = lambda_e Delta^2 - (lambda_r - lambda_e) Delta + beta0 I,
/// diagonal in the cosine basis with symbol a_k.
struct OperatorA {
  double lambda_r = 1.0;
  double lambda_e = 1.0;
  double beta0 = 1.0;
  double lambda0 = 1.0;  ///< smallest symbol over the retained modes
  std::vector<double> symbols;

  double symbol(double mu) const { return lambda_e * mu * mu + (lambda_r - lambda_e) * mu + beta0; }
};

/// beta0 = max(1, (lambda_e - lambda_r)^2 / (4 lambda_e) + 1) if lambda_e > lambda_r, else 1.
double select_beta0(double lambda_r, double lambda_e);

namespace detail {
struct GridPlans;
}

/// Tensor-product Neumann cosine eigenbasis of -Delta on a box, truncated at
/// per-axis mode index n_j. Modes are stored lexicographically in (k_1..k_d).
///
/// Owns the FFTW plans for the native and padded grids; all transform members
/// are const and re-entrant, with scratch passed in by the caller.
class SpectralBasis {
 public:
  SpectralBasis(const BoxDomain& domain, std::array<int, kMaxDim> cutoff);

  const BoxDomain& domain() const noexcept { return domain_; }
  int dim() const noexcept { return domain_.dim; }
  const std::array<int, kMaxDim>& cutoff() const noexcept { return cutoff_; }
  int max_cutoff() const;

  std::size_t mode_count() const noexcept { return modes_.size(); }
  const MultiIndex& mode(std::size_t i) const { return modes_[i]; }
  double eigenvalue(std::size_t i) const { return eigenvalues_[i]; }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  /// pi k_axis / L_axis for mode i.
  double wavenumber(std::size_t i, int axis) const;
  std::size_t index_of(const MultiIndex& k) const;

  std::size_t grid_points(GridLevel level) const;
  std::array<int, kMaxDim> grid_shape(GridLevel level) const;
  /// Midpoint coordinates along one axis.
  std::vector<double> grid_coordinates(GridLevel level, int axis) const;
  /// Quadrature weight of a single node (cell volume).
  double cell_volume(GridLevel level) const;

  /// Scalar synthesis: nodal values of sum_k c_k e_k. `nodal` is overwritten.
  void to_grid(std::span<const double> coeffs, std::span<double> nodal, GridLevel level) const;
  /// Nodal values of d/dx_axis of sum_k c_k e_k (a sine series along `axis`).
  void derivative_to_grid(std::span<const double> coeffs, int axis, std::span<double> nodal,
                          GridLevel level) const;
  /// Scalar analysis by midpoint quadrature: coeffs_k = <f, e_k> for retained k.
  /// Exact for nodal data that is a cosine polynomial of degree < 2 * grid size.
  /// `nodal` is used as FFT scratch and destroyed.
  void to_modes(std::span<double> nodal, std::span<double> coeffs, GridLevel level) const;
  /// Applies the Laplacian to every cosine mode representable on the grid
  /// (not only the retained ones). `nodal` is transformed in place.
  void grid_laplacian(std::span<double> nodal, GridLevel level) const;

  void to_grid(const SpectralField& u, VectorField& out) const;
  void to_modes(VectorField& nodal, SpectralField& out) const;

  /// Direct evaluation of e_k at a point; slow, for oracles and tests.
  double basis_function(std::size_t mode, std::span<const double> x) const;

 private:
  const detail::GridPlans& plans(GridLevel level) const;

  BoxDomain domain_;
  std::array<int, kMaxDim> cutoff_{};
  std::array<std::size_t, kMaxDim> strides_{};
  std::vector<MultiIndex> modes_;
  std::vector<double> eigenvalues_;
  std::shared_ptr<const detail::GridPlans> native_;
  std::shared_ptr<const detail::GridPlans> padded_;
};

/// Validates the cutoff (n_j < N_j on every axis) and builds the basis.
SpectralBasis build_basis(const BoxDomain& domain, std::span<const int> cutoff);

OperatorA make_operator_a(const SpectralBasis& basis, double lambda_r, double lambda_e);

VectorField inverse_transform(const SpectralBasis& basis, const SpectralField& coeffs,
                              GridLevel level = GridLevel::native);
/// Throws ConfigError on a shape mismatch.
SpectralField forward_transform(const SpectralBasis& basis, const VectorField& field);

SpectralField apply_laplacian(const SpectralBasis& basis, const SpectralField& coeffs);
/// Multiplies mode k by exp(-t a_k). Throws ConfigError for t < 0.
SpectralField apply_semigroup(const SpectralBasis& basis, const SpectralField& coeffs, double t,
                              const OperatorA& a);
/// Orthogonal projection onto modes with every k_j <= n.
SpectralField project(const SpectralBasis& basis, const SpectralField& coeffs, int n);
void project_in_place(const SpectralBasis& basis, SpectralField& coeffs, int n);

/// Spectral seminorms: sum mu_k |c_k|^2 and sum mu_k^2 |c_k|^2.
double grad_norm_sq(const SpectralBasis& basis, const SpectralField& u);
double lap_norm_sq(const SpectralBasis& basis, const SpectralField& u);

/// Version string of the FFT backend.
const char* fft_backend_version();

}  // namespace llbar
