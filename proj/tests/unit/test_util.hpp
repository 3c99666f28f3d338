#pragma once

#include <array>
#include <span>
#include <vector>

#include "llbar/field.hpp"
#include "llbar/noise.hpp"
#include "llbar/spectral.hpp"

namespace llbar::testing {

inline SpectralBasis basis_1d(double L, int N, int n) {
  const std::vector<double> len{L};
  const std::vector<int> pts{N}, cut{n};
  return build_basis(BoxDomain::make(len, pts), cut);
}

inline SpectralBasis basis_2d(double L0, double L1, int N, int n) {
  const std::vector<double> len{L0, L1};
  const std::vector<int> pts{N, N}, cut{n, n};
  return build_basis(BoxDomain::make(len, pts), cut);
}

// Coefficients N(0,1) / (1 + |k|^2) on modes with every k_j <= n.
inline SpectralField random_coeffs(const SpectralBasis& b, int n, std::uint64_t seed) {
  SpectralField u(b.mode_count());
  for (std::size_t i = 0; i < b.mode_count(); ++i) {
    double k2 = 0.0;
    bool in = true;
    for (int a = 0; a < b.dim(); ++a) {
      in = in && b.mode(i)[a] <= n;
      k2 += double(b.mode(i)[a]) * b.mode(i)[a];
    }
    if (!in) continue;
    for (int c = 0; c < 3; ++c) u.comp(c)[i] = counter_normal(seed, 99, i, c) / (1.0 + k2);
  }
  return u;
}

// Dense pointwise synthesis, independent of the FFT path.
inline Vec3 dense_eval(const SpectralBasis& b, const SpectralField& u, std::span<const double> x) {
  Vec3 v{0, 0, 0};
  for (std::size_t i = 0; i < b.mode_count(); ++i) {
    const double e = b.basis_function(i, x);
    for (int c = 0; c < 3; ++c) v[c] += u.comp(c)[i] * e;
  }
  return v;
}

inline double max_abs_diff(const Components3& a, const Components3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

inline double max_abs(const Components3& a) {
  double m = 0.0;
  for (double x : a.raw()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace llbar::testing
