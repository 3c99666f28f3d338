#include "llbar/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

#include "llbar/error.hpp"

namespace llbar {

namespace {

// The FFTW planner and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p == nullptr) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

PlanPtr make_plan(int rank, const int* n, const fftw_r2r_kind* kinds, std::size_t count) {
  std::vector<double> dummy(count);
  std::lock_guard lock(planner_mutex());
  fftw_plan p = fftw_plan_r2r(rank, n, dummy.data(), dummy.data(), kinds,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (p == nullptr) throw std::runtime_error("FFTW failed to create an r2r plan");
  return PlanPtr(p);
}

}  // namespace

namespace detail {

struct GridPlans {
  int dim = 1;
  std::array<int, kMaxDim> shape{1, 1, 1};
  std::size_t count = 1;
  PlanPtr forward;
  PlanPtr inverse_cos;
  std::array<PlanPtr, kMaxDim> inverse_sine;

  std::vector<std::size_t> cos_index;
  std::vector<double> cos_scale;
  std::vector<double> fwd_scale;
  std::array<std::vector<std::ptrdiff_t>, kMaxDim> sine_index;
  std::array<std::vector<double>, kMaxDim> sine_scale;
  std::vector<double> grid_laplacian_symbol;  // -mu(grid index) / prod(2 P_j)
};

}  // namespace detail

namespace {

std::shared_ptr<const detail::GridPlans> build_plans(const BoxDomain& dom, int factor,
                                                      const std::vector<MultiIndex>& modes) {
  auto gp = std::make_shared<detail::GridPlans>();
  const int d = dom.dim;
  gp->dim = d;
  gp->count = 1;
  for (int j = 0; j < d; ++j) {
    gp->shape[j] = dom.points[j] * factor;
    gp->count *= static_cast<std::size_t>(gp->shape[j]);
  }
  std::array<std::size_t, kMaxDim> gstride{1, 1, 1};
  for (int j = d - 2; j >= 0; --j) gstride[j] = gstride[j + 1] * gp->shape[j + 1];

  std::array<fftw_r2r_kind, kMaxDim> kinds{};
  kinds.fill(FFTW_REDFT10);
  gp->forward = make_plan(d, gp->shape.data(), kinds.data(), gp->count);
  kinds.fill(FFTW_REDFT01);
  gp->inverse_cos = make_plan(d, gp->shape.data(), kinds.data(), gp->count);
  for (int a = 0; a < d; ++a) {
    kinds.fill(FFTW_REDFT01);
    kinds[a] = FFTW_RODFT01;
    gp->inverse_sine[a] = make_plan(d, gp->shape.data(), kinds.data(), gp->count);
  }

  const std::size_t m = modes.size();
  gp->cos_index.resize(m);
  gp->cos_scale.resize(m);
  gp->fwd_scale.resize(m);
  for (int a = 0; a < d; ++a) {
    gp->sine_index[a].assign(m, -1);
    gp->sine_scale[a].assign(m, 0.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t idx = 0;
    double cs = 1.0;
    double fs = 1.0;
    for (int j = 0; j < d; ++j) {
      const int k = modes[i][j];
      const double len = dom.lengths[j];
      const double p = gp->shape[j];
      idx += static_cast<std::size_t>(k) * gstride[j];
      cs *= (k == 0) ? 1.0 / std::sqrt(len) : 1.0 / std::sqrt(2.0 * len);
      fs *= (k == 0) ? std::sqrt(len) / (2.0 * p) : std::sqrt(len / 2.0) / p;
    }
    gp->cos_index[i] = idx;
    gp->cos_scale[i] = cs;
    gp->fwd_scale[i] = fs;
    for (int a = 0; a < d; ++a) {
      const int ka = modes[i][a];
      if (ka == 0) continue;
      // Frequency k along a sine axis sits at RODFT01 input index k - 1.
      gp->sine_index[a][i] = static_cast<std::ptrdiff_t>(idx - gstride[a]);
      gp->sine_scale[a][i] = cs;  // 1/sqrt(2L) on the sine axis, same as cosine for k > 0
    }
  }

  gp->grid_laplacian_symbol.resize(gp->count);
  double norm = 1.0;
  for (int j = 0; j < d; ++j) norm *= 2.0 * gp->shape[j];
  for (std::size_t flat = 0; flat < gp->count; ++flat) {
    std::size_t rest = flat;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) {
      const std::size_t k = rest / gstride[j];
      rest %= gstride[j];
      const double w = std::numbers::pi * static_cast<double>(k) / dom.lengths[j];
      mu += w * w;
    }
    gp->grid_laplacian_symbol[flat] = -mu / norm;
  }
  return gp;
}

void check_size(std::span<const double> s, std::size_t expected, const char* what) {
  if (s.size() != expected)
    throw ConfigError(std::string("shape mismatch in ") + what + ": got " + std::to_string(s.size()) +
                      ", expected " + std::to_string(expected));
}

}  // namespace

BoxDomain BoxDomain::make(std::span<const double> lengths, std::span<const int> points) {
  if (lengths.size() != points.size() || lengths.empty() || lengths.size() > kMaxDim)
    throw ConfigError("box domain needs 1..3 lengths and the same number of point counts");
  BoxDomain d;
  d.dim = static_cast<int>(lengths.size());
  d.lengths = {1.0, 1.0, 1.0};
  d.points = {1, 1, 1};
  for (int j = 0; j < d.dim; ++j) {
    d.lengths[j] = lengths[j];
    d.points[j] = points[j];
  }
  d.validate();
  return d;
}

void BoxDomain::validate() const {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("domain dimension must be 1, 2 or 3");
  for (int j = 0; j < dim; ++j) {
    if (!(lengths[j] > 0.0) || !std::isfinite(lengths[j]))
      throw ConfigError("box side lengths must be positive");
    if (points[j] < 4) throw ConfigError("collocation resolution must be at least 4 per axis");
    if (points[j] % 2 != 0) throw ConfigError("collocation resolution must be even");
  }
}

std::size_t BoxDomain::point_count() const {
  std::size_t n = 1;
  for (int j = 0; j < dim; ++j) n *= static_cast<std::size_t>(points[j]);
  return n;
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int j = 0; j < dim; ++j) v *= lengths[j];
  return v;
}

double select_beta0(double lambda_r, double lambda_e) {
  if (lambda_e > lambda_r) {
    const double gap = lambda_e - lambda_r;
    return std::max(1.0, gap * gap / (4.0 * lambda_e) + 1.0);
  }
  return 1.0;
}

SpectralBasis::SpectralBasis(const BoxDomain& domain, std::array<int, kMaxDim> cutoff)
    : domain_(domain), cutoff_(cutoff) {
  domain_.validate();
  const int d = domain_.dim;
  for (int j = d; j < kMaxDim; ++j) cutoff_[j] = 0;
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) {
    if (cutoff_[j] < 0 || cutoff_[j] >= domain_.points[j])
      throw ConfigError("cutoff must satisfy 0 <= n_j < N_j (axis " + std::to_string(j) + ")");
    count *= static_cast<std::size_t>(cutoff_[j] + 1);
  }
  strides_ = {1, 1, 1};
  for (int j = d - 2; j >= 0; --j) strides_[j] = strides_[j + 1] * (cutoff_[j + 1] + 1);

  modes_.resize(count);
  eigenvalues_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    MultiIndex k{0, 0, 0};
    std::size_t rest = i;
    double mu = 0.0;
    for (int j = 0; j < d; ++j) {
      k[j] = static_cast<int>(rest / strides_[j]);
      rest %= strides_[j];
      const double w = std::numbers::pi * k[j] / domain_.lengths[j];
      mu += w * w;
    }
    modes_[i] = k;
    eigenvalues_[i] = mu;
  }
  native_ = build_plans(domain_, 1, modes_);
  padded_ = build_plans(domain_, 2, modes_);
}

int SpectralBasis::max_cutoff() const {
  return *std::max_element(cutoff_.begin(), cutoff_.begin() + domain_.dim);
}

double SpectralBasis::wavenumber(std::size_t i, int axis) const {
  return std::numbers::pi * modes_[i][axis] / domain_.lengths[axis];
}

std::size_t SpectralBasis::index_of(const MultiIndex& k) const {
  std::size_t idx = 0;
  for (int j = 0; j < domain_.dim; ++j) {
    if (k[j] < 0 || k[j] > cutoff_[j]) throw ConfigError("mode index outside the basis cutoff");
    idx += static_cast<std::size_t>(k[j]) * strides_[j];
  }
  return idx;
}

const detail::GridPlans& SpectralBasis::plans(GridLevel level) const {
  return level == GridLevel::native ? *native_ : *padded_;
}

std::size_t SpectralBasis::grid_points(GridLevel level) const { return plans(level).count; }

std::array<int, kMaxDim> SpectralBasis::grid_shape(GridLevel level) const {
  return plans(level).shape;
}

std::vector<double> SpectralBasis::grid_coordinates(GridLevel level, int axis) const {
  const int p = plans(level).shape[axis];
  std::vector<double> x(p);
  for (int i = 0; i < p; ++i) x[i] = (i + 0.5) * domain_.lengths[axis] / p;
  return x;
}

double SpectralBasis::cell_volume(GridLevel level) const {
  return domain_.volume() / static_cast<double>(grid_points(level));
}

void SpectralBasis::to_grid(std::span<const double> coeffs, std::span<double> nodal,
                            GridLevel level) const {
  const auto& gp = plans(level);
  check_size(coeffs, modes_.size(), "to_grid coefficients");
  check_size(nodal, gp.count, "to_grid nodal buffer");
  std::fill(nodal.begin(), nodal.end(), 0.0);
  for (std::size_t i = 0; i < modes_.size(); ++i) nodal[gp.cos_index[i]] = coeffs[i] * gp.cos_scale[i];
  fftw_execute_r2r(gp.inverse_cos.get(), nodal.data(), nodal.data());
}

void SpectralBasis::derivative_to_grid(std::span<const double> coeffs, int axis,
                                       std::span<double> nodal, GridLevel level) const {
  const auto& gp = plans(level);
  check_size(coeffs, modes_.size(), "derivative coefficients");
  check_size(nodal, gp.count, "derivative nodal buffer");
  if (axis < 0 || axis >= domain_.dim) throw ConfigError("derivative axis out of range");
  std::fill(nodal.begin(), nodal.end(), 0.0);
  const auto& sidx = gp.sine_index[axis];
  const auto& sscale = gp.sine_scale[axis];
  const double base = std::numbers::pi / domain_.lengths[axis];
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (sidx[i] < 0) continue;
    nodal[static_cast<std::size_t>(sidx[i])] = -base * modes_[i][axis] * coeffs[i] * sscale[i];
  }
  fftw_execute_r2r(gp.inverse_sine[axis].get(), nodal.data(), nodal.data());
}

void SpectralBasis::to_modes(std::span<double> nodal, std::span<double> coeffs,
                             GridLevel level) const {
  const auto& gp = plans(level);
  check_size(nodal, gp.count, "to_modes nodal buffer");
  check_size(coeffs, modes_.size(), "to_modes coefficients");
  fftw_execute_r2r(gp.forward.get(), nodal.data(), nodal.data());
  for (std::size_t i = 0; i < modes_.size(); ++i) coeffs[i] = nodal[gp.cos_index[i]] * gp.fwd_scale[i];
}

void SpectralBasis::grid_laplacian(std::span<double> nodal, GridLevel level) const {
  const auto& gp = plans(level);
  check_size(nodal, gp.count, "grid_laplacian buffer");
  fftw_execute_r2r(gp.forward.get(), nodal.data(), nodal.data());
  for (std::size_t i = 0; i < gp.count; ++i) nodal[i] *= gp.grid_laplacian_symbol[i];
  fftw_execute_r2r(gp.inverse_cos.get(), nodal.data(), nodal.data());
}

void SpectralBasis::to_grid(const SpectralField& u, VectorField& out) const {
  if (u.modes() != modes_.size()) throw ConfigError("coefficient count does not match the basis");
  if (out.points() != grid_points(out.level())) out = VectorField(grid_points(out.level()), out.level());
  for (int c = 0; c < 3; ++c) to_grid(u.comp(c), out.comp(c), out.level());
}

void SpectralBasis::to_modes(VectorField& nodal, SpectralField& out) const {
  if (nodal.points() != grid_points(nodal.level()))
    throw ConfigError("nodal field does not match the grid");
  if (out.modes() != modes_.size()) out = SpectralField(modes_.size());
  for (int c = 0; c < 3; ++c) to_modes(nodal.comp(c), out.comp(c), nodal.level());
}

double SpectralBasis::basis_function(std::size_t mode, std::span<const double> x) const {
  double v = 1.0;
  for (int j = 0; j < domain_.dim; ++j) {
    const int k = modes_[mode][j];
    const double len = domain_.lengths[j];
    const double c = (k == 0) ? 1.0 / std::sqrt(len) : std::sqrt(2.0 / len);
    v *= c * std::cos(std::numbers::pi * k * x[j] / len);
  }
  return v;
}

SpectralBasis build_basis(const BoxDomain& domain, std::span<const int> cutoff) {
  if (static_cast<int>(cutoff.size()) != domain.dim)
    throw ConfigError("cutoff needs one entry per axis");
  std::array<int, kMaxDim> c{0, 0, 0};
  for (int j = 0; j < domain.dim; ++j) c[j] = cutoff[j];
  return SpectralBasis(domain, c);
}

OperatorA make_operator_a(const SpectralBasis& basis, double lambda_r, double lambda_e) {
  if (!(lambda_r > 0.0)) throw ConfigError("lambda_r must be positive");
  if (lambda_e < 0.0) throw ConfigError("lambda_e must be nonnegative");
  OperatorA a;
  a.lambda_r = lambda_r;
  a.lambda_e = lambda_e;
  a.beta0 = select_beta0(lambda_r, lambda_e);
  a.symbols.resize(basis.mode_count());
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    a.symbols[i] = a.symbol(basis.eigenvalue(i));
    lo = std::min(lo, a.symbols[i]);
  }
  a.lambda0 = lo;
  return a;
}

VectorField inverse_transform(const SpectralBasis& basis, const SpectralField& coeffs,
                              GridLevel level) {
  VectorField out(basis.grid_points(level), level);
  basis.to_grid(coeffs, out);
  return out;
}

SpectralField forward_transform(const SpectralBasis& basis, const VectorField& field) {
  VectorField scratch = field;
  SpectralField out(basis.mode_count());
  basis.to_modes(scratch, out);
  return out;
}

SpectralField apply_laplacian(const SpectralBasis& basis, const SpectralField& coeffs) {
  SpectralField out(coeffs.modes());
  for (int c = 0; c < 3; ++c) {
    auto in = coeffs.comp(c);
    auto o = out.comp(c);
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = -basis.eigenvalue(i) * in[i];
  }
  return out;
}

SpectralField apply_semigroup(const SpectralBasis& basis, const SpectralField& coeffs, double t,
                              const OperatorA& a) {
  if (t < 0.0) throw ConfigError("semigroup time must be nonnegative");
  if (a.symbols.size() != basis.mode_count()) throw ConfigError("operator does not match basis");
  SpectralField out = coeffs;
  for (int c = 0; c < 3; ++c) {
    auto o = out.comp(c);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= std::exp(-t * a.symbols[i]);
  }
  return out;
}

void project_in_place(const SpectralBasis& basis, SpectralField& coeffs, int n) {
  for (std::size_t i = 0; i < basis.mode_count(); ++i) {
    const auto& k = basis.mode(i);
    bool keep = true;
    for (int j = 0; j < basis.dim(); ++j) keep = keep && k[j] <= n;
    if (!keep)
      for (int c = 0; c < 3; ++c) coeffs.comp(c)[i] = 0.0;
  }
}

SpectralField project(const SpectralBasis& basis, const SpectralField& coeffs, int n) {
  SpectralField out = coeffs;
  project_in_place(basis, out, n);
  return out;
}

double grad_norm_sq(const SpectralBasis& basis, const SpectralField& u) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto x = u.comp(c);
    for (std::size_t i = 0; i < x.size(); ++i) s += basis.eigenvalue(i) * x[i] * x[i];
  }
  return s;
}

double lap_norm_sq(const SpectralBasis& basis, const SpectralField& u) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    auto x = u.comp(c);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double mu = basis.eigenvalue(i);
      s += mu * mu * x[i] * x[i];
    }
  }
  return s;
}

const char* fft_backend_version() { return fftw_version; }

}  // namespace llbar
