#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "llbar/field.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). A keyed bijection on
/// 128-bit counters; the output is a pure function of (key, counter).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Standard normal determined entirely by its coordinates.
double counter_normal(std::uint64_t seed, std::uint64_t path_id, std::uint64_t index, std::uint32_t k);

/// Generator recipe for the truncated noise coefficients:
/// g_k = c_g (1 + mu_k)^(-r) e_k a_k, h_k = c_h (1 + mu_k)^(-r) e_k a_k,
/// with e_k the k-th smoothest basis function and a_k cycling through x, y, z.
struct NoiseSpec {
  int K = 0;
  double r = 2.0;
  double c_g = 0.0;
  double c_h = 0.0;
};

/// A single-mode, single-axis coefficient field: amplitude * e_mode * unit(axis).
struct NoiseDirection {
  std::size_t mode = 0;
  int axis = 0;
  double amplitude = 0.0;
};

struct NoiseFamily {
  NoiseSpec spec;
  std::vector<NoiseDirection> g;
  std::vector<NoiseDirection> h;
  double sigma_g2 = 0.0;  ///< sum ||g_k||_{H^2}^2
  double sigma_h2 = 0.0;  ///< sum ||h_k||_{H^2}^2

  int size() const { return static_cast<int>(g.size()); }
  bool additive_off() const;
  bool multiplicative_off() const;
  SpectralField g_field(const SpectralBasis& basis, int k) const;
  SpectralField h_field(const SpectralBasis& basis, int k) const;
};

/// Throws ConfigError when K < 0, r <= 0, or K exceeds the basis size.
NoiseFamily build_noise_family(const SpectralBasis& basis, const NoiseSpec& spec);

/// Handle on one realisation of the driving Wiener processes. The increment of
/// W_k over step s is the sum of `substeps` independent N(0, dt/substeps)
/// draws at fine indices s*substeps + j, so a path at (dt, r) and a path at
/// (dt/r, 1) with the same seed and id see the same Brownian motion.
struct NoisePath {
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;
  double dt = 1e-3;
  int substeps = 1;

  void sample_increments(std::uint64_t step, std::span<double> out) const;
  std::vector<double> sample_increments(std::uint64_t step, int K) const;
};

/// G_k(u) = g_k + gamma u x h_k at the nodes of `level`. Throws on k out of range.
VectorField diffusion(const SpectralBasis& basis, const SpectralField& u, const NoiseFamily& fam,
                      double gamma, int k, GridLevel level = GridLevel::native);
/// Pi_n G_k(u), the noise coefficient the Galerkin system actually uses.
SpectralField projected_diffusion(const SpectralBasis& basis, const SpectralField& u,
                                  const NoiseFamily& fam, double gamma, int k);
/// sum_k ||Pi_n G_k(u)||_L2^2.
double quadratic_variation_sum(const SpectralBasis& basis, const SpectralField& u,
                               const NoiseFamily& fam, double gamma);

}  // namespace llbar
