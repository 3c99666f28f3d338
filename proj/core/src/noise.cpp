#include "llbar/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "llbar/error.hpp"

namespace llbar {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double counter_normal(std::uint64_t seed, std::uint64_t path_id, std::uint64_t index, std::uint32_t k) {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), k,
      static_cast<std::uint32_t>(path_id ^ (path_id >> 32))};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed),
                                         static_cast<std::uint32_t>(seed >> 32)};
  const auto x = philox4x32_10(ctr, key);
  constexpr double kTwoM53 = 1.0 / 9007199254740992.0;
  const std::uint64_t a = ((static_cast<std::uint64_t>(x[0]) << 32) | x[1]) >> 11;
  const std::uint64_t b = ((static_cast<std::uint64_t>(x[2]) << 32) | x[3]) >> 11;
  const double u1 = 1.0 - static_cast<double>(a) * kTwoM53;  // (0, 1]
  const double u2 = static_cast<double>(b) * kTwoM53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool NoiseFamily::additive_off() const {
  return std::all_of(g.begin(), g.end(), [](const NoiseDirection& d) { return d.amplitude == 0.0; });
}

bool NoiseFamily::multiplicative_off() const {
  return std::all_of(h.begin(), h.end(), [](const NoiseDirection& d) { return d.amplitude == 0.0; });
}

namespace {

SpectralField direction_field(const SpectralBasis& basis, const NoiseDirection& d) {
  SpectralField f(basis.mode_count());
  f.comp(d.axis)[d.mode] = d.amplitude;
  return f;
}

void check_index(const NoiseFamily& fam, int k) {
  if (k < 0 || k >= fam.size())
    throw ConfigError("noise index " + std::to_string(k) + " out of range [0, " +
                      std::to_string(fam.size()) + ")");
}

}  // namespace

SpectralField NoiseFamily::g_field(const SpectralBasis& basis, int k) const {
  check_index(*this, k);
  return direction_field(basis, g[k]);
}

SpectralField NoiseFamily::h_field(const SpectralBasis& basis, int k) const {
  check_index(*this, k);
  return direction_field(basis, h[k]);
}

NoiseFamily build_noise_family(const SpectralBasis& basis, const NoiseSpec& spec) {
  if (spec.K < 0) throw ConfigError("noise truncation K must be nonnegative");
  if (!(spec.r > 0.0)) throw ConfigError("noise decay exponent r must be positive");
  if (!std::isfinite(spec.c_g) || !std::isfinite(spec.c_h)) throw ConfigError("noise amplitudes must be finite");
  if (static_cast<std::size_t>(spec.K) > basis.mode_count())
    throw ConfigError("noise truncation K = " + std::to_string(spec.K) + " exceeds the basis size " +
                      std::to_string(basis.mode_count()));

  std::vector<std::size_t> order(basis.mode_count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return basis.eigenvalue(a) < basis.eigenvalue(b);
  });

  NoiseFamily fam;
  fam.spec = spec;
  fam.g.reserve(spec.K);
  fam.h.reserve(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    const std::size_t m = order[k];
    const double mu = basis.eigenvalue(m);
    const double decay = std::pow(1.0 + mu, -spec.r);
    const double h2 = 1.0 + mu + mu * mu;
    const NoiseDirection g{m, k % 3, spec.c_g * decay};
    const NoiseDirection h{m, k % 3, spec.c_h * decay};
    fam.sigma_g2 += g.amplitude * g.amplitude * h2;
    fam.sigma_h2 += h.amplitude * h.amplitude * h2;
    fam.g.push_back(g);
    fam.h.push_back(h);
  }
  return fam;
}

void NoisePath::sample_increments(std::uint64_t step, std::span<double> out) const {
  const int r = std::max(1, substeps);
  const double scale = std::sqrt(dt / r);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double s = 0.0;
    for (int j = 0; j < r; ++j)
      s += counter_normal(seed, path_id, step * static_cast<std::uint64_t>(r) + j, static_cast<std::uint32_t>(k));
    out[k] = scale * s;
  }
}

std::vector<double> NoisePath::sample_increments(std::uint64_t step, int K) const {
  std::vector<double> out(static_cast<std::size_t>(std::max(0, K)));
  sample_increments(step, out);
  return out;
}

VectorField diffusion(const SpectralBasis& basis, const SpectralField& u, const NoiseFamily& fam,
                      double gamma, int k, GridLevel level) {
  check_index(fam, k);
  VectorField g = inverse_transform(basis, fam.g_field(basis, k), level);
  if (gamma == 0.0) return g;
  VectorField h = inverse_transform(basis, fam.h_field(basis, k), level);
  VectorField uv = inverse_transform(basis, u, level);
  for (std::size_t i = 0; i < g.points(); ++i) {
    const Vec3 x = cross(uv.at(i), h.at(i));
    Vec3 r = g.at(i);
    for (int c = 0; c < 3; ++c) r[c] += gamma * x[c];
    g.set(i, r);
  }
  return g;
}

SpectralField projected_diffusion(const SpectralBasis& basis, const SpectralField& u,
                                  const NoiseFamily& fam, double gamma, int k) {
  check_index(fam, k);
  SpectralField out = fam.g_field(basis, k);
  if (gamma == 0.0 || fam.h[k].amplitude == 0.0) return out;
  VectorField h = inverse_transform(basis, fam.h_field(basis, k), GridLevel::padded);
  VectorField uv = inverse_transform(basis, u, GridLevel::padded);
  for (std::size_t i = 0; i < uv.points(); ++i) uv.set(i, cross(uv.at(i), h.at(i)));
  SpectralField x(basis.mode_count());
  basis.to_modes(uv, x);
  x *= gamma;
  out += x;
  return out;
}

double quadratic_variation_sum(const SpectralBasis& basis, const SpectralField& u,
                               const NoiseFamily& fam, double gamma) {
  double s = 0.0;
  for (const auto& d : fam.g) s += d.amplitude * d.amplitude;
  if (gamma == 0.0 || fam.multiplicative_off()) return s;

  // Same result as summing projected_diffusion, with u synthesized once.
  const GridLevel lv = GridLevel::padded;
  const VectorField uv = inverse_transform(basis, u, lv);
  std::vector<double> unit(basis.mode_count(), 0.0);
  std::vector<double> e(basis.grid_points(lv));
  VectorField x(basis.grid_points(lv), lv);
  SpectralField xm(basis.mode_count());
  s = 0.0;
  for (int k = 0; k < fam.size(); ++k) {
    const NoiseDirection& h = fam.h[k];
    std::fill(unit.begin(), unit.end(), 0.0);
    unit[h.mode] = h.amplitude;
    basis.to_grid(unit, e, lv);
    for (std::size_t i = 0; i < uv.points(); ++i) {
      Vec3 hv{0.0, 0.0, 0.0};
      hv[h.axis] = e[i];
      x.set(i, cross(uv.at(i), hv));
    }
    basis.to_modes(x, xm);
    xm *= gamma;
    xm.comp(fam.g[k].axis)[fam.g[k].mode] += fam.g[k].amplitude;
    s += inner(xm, xm);
  }
  return s;
}

}  // namespace llbar
