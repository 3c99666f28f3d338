#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "llbar/field.hpp"
#include "llbar/field_ops.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  int fields = 20;
  /// Test hook: evaluates the drift with the signs of alpha, kappa1 and kappa2
  /// reversed, so the pairing check must fail.
  bool flip_field_sign = false;
};

struct SelftestCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  double seconds = 0.0;
  bool pass() const;
};

/// Identity suite on random band-limited fields in d = 1 (N = 128) and d = 2 (N = 64^2).
SelftestReport run_selftest(const SelftestOptions& opt = {});

/// Random field with every k_j <= n: coefficients N(0,1) / (1 + |k|^2), seeded by (seed, id).
SpectralField random_field(const SpectralBasis& basis, int n, std::uint64_t seed, std::uint64_t id);

/// Parameters with every drift term switched on, used by the pairing check.
ModelParams pairing_params(int dim);

/// |<F,H> - (lambda_r ||H||^2 + lambda_e ||grad H||^2 + <S,H>)| relative to the magnitude of the right side.
/// `drift_params` feeds the drift only; H and S come from `p`.
double pairing_residual(const SpectralBasis& basis, const SpectralField& u, const ModelParams& p,
                        const ModelParams& drift_params);

}  // namespace llbar
