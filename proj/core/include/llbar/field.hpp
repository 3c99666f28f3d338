#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace llbar {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

/// Which collocation grid a nodal field lives on. The padded grid doubles the
/// resolution per axis and is used wherever products of fields are projected.
enum class GridLevel { native, padded };

/// Component-major storage of three scalar arrays of equal length.
class Components3 {
 public:
  Components3() = default;
  explicit Components3(std::size_t n) : n_(n), data_(3 * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::span<double> comp(int c) { return {data_.data() + c * n_, n_}; }
  std::span<const double> comp(int c) const { return {data_.data() + c * n_, n_}; }
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  Vec3 at(std::size_t i) const { return {data_[i], data_[n_ + i], data_[2 * n_ + i]}; }
  void set(std::size_t i, const Vec3& v) {
    data_[i] = v[0];
    data_[n_ + i] = v[1];
    data_[2 * n_ + i] = v[2];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Components3& operator+=(const Components3& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Components3& operator-=(const Components3& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Components3& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  friend bool operator==(const Components3&, const Components3&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Coefficients of an R^3-valued field in the orthonormal cosine basis,
/// one array per Cartesian component, modes in basis order.
class SpectralField : public Components3 {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t modes) : Components3(modes) {}
  std::size_t modes() const noexcept { return size(); }
};

/// Nodal values of an R^3-valued field on a midpoint collocation grid.
class VectorField : public Components3 {
 public:
  VectorField() = default;
  VectorField(std::size_t points, GridLevel level) : Components3(points), level_(level) {}
  std::size_t points() const noexcept { return size(); }
  GridLevel level() const noexcept { return level_; }

 private:
  GridLevel level_ = GridLevel::native;
};

inline SpectralField operator+(SpectralField a, const SpectralField& b) {
  a += b;
  return a;
}
inline SpectralField operator-(SpectralField a, const SpectralField& b) {
  a -= b;
  return a;
}
inline SpectralField operator*(double s, SpectralField a) {
  a *= s;
  return a;
}

/// Plain l2 inner product of coefficient vectors; equals the L2 inner product
/// of the represented fields (orthonormal basis).
inline double inner(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  auto x = a.raw();
  auto y = b.raw();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace llbar
