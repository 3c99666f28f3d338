#include "llbar/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "llbar/diagnostics.hpp"
#include "llbar/error.hpp"

namespace llbar {

const char* initial_kind_name(InitialCondition::Kind k) {
  switch (k) {
    case InitialCondition::Kind::zero: return "zero";
    case InitialCondition::Kind::constant: return "constant";
    case InitialCondition::Kind::single_mode: return "single-mode";
    case InitialCondition::Kind::random_band_limited: return "random-band-limited";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError("expected a finite number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc() || p != end) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc() || p != end)
    throw ConfigError("expected a nonnegative integer, got '" + v + "'");
  return x;
}

std::vector<double> to_doubles(const std::string& v, std::size_t min_n, std::size_t max_n) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(s));
  if (out.size() < min_n || out.size() > max_n)
    throw ConfigError("expected " + std::to_string(min_n) + (min_n == max_n ? "" : "-" + std::to_string(max_n)) +
                      " comma-separated values, got " + std::to_string(out.size()));
  return out;
}

std::vector<int> to_ints(const std::string& v, std::size_t min_n, std::size_t max_n) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(to_int(s)));
  if (out.size() < min_n || out.size() > max_n)
    throw ConfigError("expected " + std::to_string(min_n) + "-" + std::to_string(max_n) +
                      " comma-separated integers, got " + std::to_string(out.size()));
  return out;
}

Observable parse_observable(const std::string& v) {
  for (Observable o : {Observable::l2_sq, Observable::h1_sq, Observable::psi})
    if (v == observable_name(o)) return o;
  throw ConfigError("unknown observable '" + v + "' (expected norm_u_L2_sq, norm_u_H1_sq or psi)");
}

InitialCondition::Kind parse_kind(const std::string& v) {
  using K = InitialCondition::Kind;
  for (K k : {K::zero, K::constant, K::single_mode, K::random_band_limited})
    if (v == initial_kind_name(k)) return k;
  throw ConfigError("unknown initial condition '" + v +
                    "' (expected zero, constant, single-mode or random-band-limited)");
}

// Per-axis lists given with a single entry apply to every axis.
struct AxisLists {
  std::vector<double> length;
  std::vector<int> points;
  std::vector<int> cutoff;
  std::vector<double> nu;
};

using Setter = std::function<void(ExperimentConfig&, AxisLists&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"domain.dim", [](auto& c, auto&, const auto& v) { c.domain.dim = static_cast<int>(to_int(v)); }},
      {"domain.length", [](auto&, auto& l, const auto& v) { l.length = to_doubles(v, 1, 3); }},
      {"domain.points", [](auto&, auto& l, const auto& v) { l.points = to_ints(v, 1, 3); }},
      {"domain.cutoff", [](auto&, auto& l, const auto& v) { l.cutoff = to_ints(v, 1, 3); }},
      {"model.lambda_r", [](auto& c, auto&, const auto& v) { c.model.lambda_r = to_double(v); }},
      {"model.lambda_e", [](auto& c, auto&, const auto& v) { c.model.lambda_e = to_double(v); }},
      {"model.gamma", [](auto& c, auto&, const auto& v) { c.model.gamma = to_double(v); }},
      {"model.alpha", [](auto& c, auto&, const auto& v) { c.model.alpha = to_double(v); }},
      {"model.kappa1", [](auto& c, auto&, const auto& v) { c.model.kappa1 = to_double(v); }},
      {"model.kappa2", [](auto& c, auto&, const auto& v) { c.model.kappa2 = to_double(v); }},
      {"model.beta1", [](auto& c, auto&, const auto& v) { c.model.beta1 = to_double(v); }},
      {"model.beta2", [](auto& c, auto&, const auto& v) { c.model.beta2 = to_double(v); }},
      {"model.nu", [](auto&, auto& l, const auto& v) { l.nu = to_doubles(v, 1, 3); }},
      {"model.torque_matrix",
       [](auto& c, auto&, const auto& v) {
         const auto m = to_doubles(v, 9, 9);
         for (int i = 0; i < 3; ++i)
           for (int j = 0; j < 3; ++j) c.model.L.M(i, j) = m[3 * i + j];
       }},
      {"model.torque_offset",
       [](auto& c, auto&, const auto& v) {
         const auto b = to_doubles(v, 3, 3);
         c.model.L.b = Eigen::Vector3d(b[0], b[1], b[2]);
       }},
      {"noise.K", [](auto& c, auto&, const auto& v) { c.noise.K = static_cast<int>(to_int(v)); }},
      {"noise.r", [](auto& c, auto&, const auto& v) { c.noise.r = to_double(v); }},
      {"noise.c_g", [](auto& c, auto&, const auto& v) { c.noise.c_g = to_double(v); }},
      {"noise.c_h", [](auto& c, auto&, const auto& v) { c.noise.c_h = to_double(v); }},
      {"scheme.name", [](auto& c, auto&, const auto& v) { c.scheme.scheme = parse_scheme(v); }},
      {"scheme.dt", [](auto& c, auto&, const auto& v) { c.scheme.dt = to_double(v); }},
      {"scheme.T", [](auto& c, auto&, const auto& v) { c.scheme.T = to_double(v); }},
      {"scheme.n", [](auto& c, auto&, const auto& v) { c.scheme.n = static_cast<int>(to_int(v)); }},
      {"scheme.record_every",
       [](auto& c, auto&, const auto& v) { c.scheme.record_every = static_cast<int>(to_int(v)); }},
      {"ensemble.paths", [](auto& c, auto&, const auto& v) { c.paths = static_cast<int>(to_int(v)); }},
      {"ensemble.seed", [](auto& c, auto&, const auto& v) { c.seed = to_u64(v); }},
      {"ensemble.workers", [](auto& c, auto&, const auto& v) { c.workers = static_cast<int>(to_int(v)); }},
      {"initial.kind", [](auto& c, auto&, const auto& v) { c.initial.kind = parse_kind(v); }},
      {"initial.value",
       [](auto& c, auto&, const auto& v) {
         const auto x = to_doubles(v, 3, 3);
         c.initial.value = {x[0], x[1], x[2]};
       }},
      {"initial.mode",
       [](auto& c, auto&, const auto& v) {
         const auto k = to_ints(v, 1, 3);
         c.initial.mode = {0, 0, 0};
         std::copy(k.begin(), k.end(), c.initial.mode.begin());
       }},
      {"initial.axis", [](auto& c, auto&, const auto& v) { c.initial.axis = static_cast<int>(to_int(v)); }},
      {"initial.amplitude", [](auto& c, auto&, const auto& v) { c.initial.amplitude = to_double(v); }},
      {"initial.modes", [](auto& c, auto&, const auto& v) { c.initial.modes = static_cast<int>(to_int(v)); }},
      {"initial.seed", [](auto& c, auto&, const auto& v) { c.initial.seed = to_u64(v); }},
      {"output.dir", [](auto& c, auto&, const auto& v) { c.out_dir = v; }},
      {"decay.tol", [](auto& c, auto&, const auto& v) { c.decay_tol = to_double(v); }},
      {"llb.eps", [](auto& c, auto&, const auto& v) { c.llb_eps = to_doubles(v, 1, 16); }},
      {"ergodic.observable",
       [](auto& c, auto&, const auto& v) { c.ergodic_observable = parse_observable(v); }},
      {"ergodic.burn_in", [](auto& c, auto&, const auto& v) { c.ergodic_burn_in = to_double(v); }},
  };
  return table;
}

template <typename T, typename U>
void apply_axis_list(const std::vector<T>& in, std::array<U, kMaxDim>& out, int dim, const char* key) {
  if (in.empty()) return;
  if (in.size() == 1) {
    out.fill(static_cast<U>(in[0]));
    return;
  }
  if (static_cast<int>(in.size()) != dim)
    throw ConfigError(std::string("[domain/model] ") + key + " needs 1 or dim = " + std::to_string(dim) + " entries");
  for (std::size_t j = 0; j < in.size(); ++j) out[j] = static_cast<U>(in[j]);
}

// Preset bodies are written in the config language itself.
const std::map<std::string, std::string>& preset_table() {
  static const std::string below_curie = R"(
[domain]
dim = 1
length = 1
points = 128
cutoff = 64
[model]
lambda_r = 1
lambda_e = 1
gamma = 1
alpha = 1
kappa1 = 1
kappa2 = 1
[noise]
K = 16
r = 2
c_g = 0.1
c_h = 0.1
[scheme]
name = exponential_euler
dt = 1e-3
T = 1
record_every = 10
[ensemble]
paths = 8
seed = 1
[initial]
kind = random-band-limited
amplitude = 0.5
modes = 8
seed = 7
)";
  static const std::map<std::string, std::string> table = {
      {"below-curie", below_curie},
      {"above-curie-decay", below_curie + R"(
[model]
kappa1 = -1
[noise]
c_g = 0
c_h = 0.63
[scheme]
T = 5
[ensemble]
paths = 100
)"},
      {"deterministic-dissipation", below_curie + R"(
[noise]
K = 0
[scheme]
dt = 1e-4
record_every = 1
[ensemble]
paths = 1
)"},
      {"invariant-measure", below_curie + R"(
[scheme]
T = 200
[ensemble]
paths = 1
[ergodic]
observable = norm_u_H1_sq
burn_in = 50
)"},
      {"llb-limit", R"(
[domain]
dim = 1
length = 1
points = 64
cutoff = 32
[model]
lambda_r = 1
lambda_e = 0
gamma = 1
alpha = 1
kappa1 = -1
kappa2 = 1
[noise]
K = 8
r = 2
c_g = 0.1
c_h = 0.2
[scheme]
name = exponential_euler
dt = 1e-3
T = 1
record_every = 10
[ensemble]
paths = 32
seed = 1
[initial]
kind = random-band-limited
amplitude = 0.5
modes = 8
seed = 7
[llb]
eps = 0.1, 0.01, 0.001
)"},
      {"zero-fixed-point", R"(
[domain]
dim = 1
length = 1
points = 16
cutoff = 8
[noise]
K = 0
[scheme]
dt = 1e-2
T = 1
record_every = 10
[initial]
kind = zero
)"},
  };
  return table;
}

// Parses `text` on top of `c`. Sections may repeat (presets rely on it);
// a key may appear only once per section block within one text.
void parse_into(ExperimentConfig& c, const std::string& text, const std::string& origin, bool allow_preset) {
  static const std::set<std::string> sections = {"domain", "model",  "noise", "scheme", "ensemble",
                                                 "initial", "output", "decay", "llb",    "ergodic"};
  AxisLists lists;
  std::string section;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      if (key != "preset") fail("unknown top-level key '" + key + "' (only 'preset' is allowed before a section)");
      if (!allow_preset) fail("nested presets are not allowed");
      if (!seen.insert("preset").second) fail("duplicate key 'preset'");
      const auto& t = preset_table();
      const auto it = t.find(value);
      if (it == t.end()) {
        std::string names;
        for (const auto& [n, _] : t) names += (names.empty() ? "" : ", ") + n;
        fail("unknown preset '" + value + "' (available: " + names + ")");
      }
      parse_into(c, it->second, "preset:" + value, false);
      c.preset = value;
      continue;
    }
    const std::string full = section + "." + key;
    const auto& table = setters();
    const auto it = table.find(full);
    if (it == table.end()) fail("unknown key '" + key + "' in section [" + section + "]");
    if (!seen.insert(full).second && allow_preset) fail("duplicate key '" + key + "' in section [" + section + "]");
    try {
      it->second(c, lists, value);
    } catch (const ConfigError& e) {
      fail("[" + section + "] " + key + ": " + e.what());
    }
  }
  const int d = c.domain.dim;
  try {
    apply_axis_list(lists.length, c.domain.lengths, d, "length");
    apply_axis_list(lists.points, c.domain.points, d, "points");
    apply_axis_list(lists.cutoff, c.cutoff, d, "cutoff");
    if (!lists.nu.empty()) {
      c.model.nu = {0.0, 0.0, 0.0};
      if (lists.nu.size() != 1 && static_cast<int>(lists.nu.size()) != d)
        throw ConfigError("[model] nu needs 1 or dim entries");
      for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j)
        c.model.nu[j] = lists.nu.size() == 1 ? lists.nu[0] : lists.nu[j];
    }
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  domain.validate();
  for (int j = 0; j < domain.dim; ++j)
    if (cutoff[j] < 0 || cutoff[j] >= domain.points[j])
      throw ConfigError("cutoff on axis " + std::to_string(j) + " must satisfy 0 <= n < N (got n = " +
                        std::to_string(cutoff[j]) + ", N = " + std::to_string(domain.points[j]) + ")");
  for (int j = domain.dim; j < kMaxDim; ++j)
    if (model.nu[j] != 0.0) throw ConfigError("spin current has entries beyond the domain dimension");
  model.validate();
  if (paths < 1) throw ConfigError("paths must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(decay_tol >= 0.0)) throw ConfigError("decay tol must be nonnegative");
  if (llb_eps.empty()) throw ConfigError("llb eps list must not be empty");
  for (double e : llb_eps)
    if (!(e > 0.0)) throw ConfigError("llb eps values must be positive");
  if (!(ergodic_burn_in >= 0.0)) throw ConfigError("ergodic burn_in must be nonnegative");
  if (initial.axis < 0 || initial.axis > 2) throw ConfigError("initial axis must be 0, 1 or 2");
  if (initial.modes < 0) throw ConfigError("initial modes must be nonnegative");
  if (initial.kind == InitialCondition::Kind::single_mode)
    for (int j = 0; j < kMaxDim; ++j) {
      const int bound = j < domain.dim ? cutoff[j] : 0;
      if (initial.mode[j] < 0 || initial.mode[j] > bound)
        throw ConfigError("initial mode index outside the basis cutoff");
    }
  const SpectralBasis basis = build_basis(domain, std::span<const int>(cutoff.data(), domain.dim));
  scheme.validate(basis);
  build_noise_family(basis, noise);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  ExperimentConfig c;
  parse_into(c, text, origin, true);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [n, _] : preset_table()) out.push_back(n);
  return out;
}

ExperimentConfig preset(const std::string& name) {
  return parse_config("preset = " + name + "\n", "<preset>");
}

std::string to_text(const ExperimentConfig& c) {
  const int d = c.domain.dim;
  auto list = [&](auto getter, int n) {
    std::string s;
    for (int j = 0; j < n; ++j) {
      if (j) s += ", ";
      s += getter(j);
    }
    return s;
  };
  auto num = [](double x) { return format_double(x); };
  std::ostringstream o;
  if (!c.preset.empty()) o << "# preset: " << c.preset << "\n";
  o << "[domain]\n";
  o << "dim = " << d << "\n";
  o << "length = " << list([&](int j) { return num(c.domain.lengths[j]); }, d) << "\n";
  o << "points = " << list([&](int j) { return std::to_string(c.domain.points[j]); }, d) << "\n";
  o << "cutoff = " << list([&](int j) { return std::to_string(c.cutoff[j]); }, d) << "\n";
  o << "[model]\n";
  o << "lambda_r = " << num(c.model.lambda_r) << "\n";
  o << "lambda_e = " << num(c.model.lambda_e) << "\n";
  o << "gamma = " << num(c.model.gamma) << "\n";
  o << "alpha = " << num(c.model.alpha) << "\n";
  o << "kappa1 = " << num(c.model.kappa1) << "\n";
  o << "kappa2 = " << num(c.model.kappa2) << "\n";
  o << "beta1 = " << num(c.model.beta1) << "\n";
  o << "beta2 = " << num(c.model.beta2) << "\n";
  o << "nu = " << list([&](int j) { return num(c.model.nu[j]); }, d) << "\n";
  o << "torque_matrix = " << list([&](int j) { return num(c.model.L.M(j / 3, j % 3)); }, 9) << "\n";
  o << "torque_offset = " << list([&](int j) { return num(c.model.L.b[j]); }, 3) << "\n";
  o << "[noise]\n";
  o << "K = " << c.noise.K << "\n";
  o << "r = " << num(c.noise.r) << "\n";
  o << "c_g = " << num(c.noise.c_g) << "\n";
  o << "c_h = " << num(c.noise.c_h) << "\n";
  o << "[scheme]\n";
  o << "name = " << scheme_name(c.scheme.scheme) << "\n";
  o << "dt = " << num(c.scheme.dt) << "\n";
  o << "T = " << num(c.scheme.T) << "\n";
  o << "n = " << c.scheme.n << "\n";
  o << "record_every = " << c.scheme.record_every << "\n";
  o << "[ensemble]\n";
  o << "paths = " << c.paths << "\n";
  o << "seed = " << c.seed << "\n";
  o << "workers = " << c.workers << "\n";
  o << "[initial]\n";
  o << "kind = " << initial_kind_name(c.initial.kind) << "\n";
  o << "value = " << list([&](int j) { return num(c.initial.value[j]); }, 3) << "\n";
  o << "mode = " << list([&](int j) { return std::to_string(c.initial.mode[j]); }, d) << "\n";
  o << "axis = " << c.initial.axis << "\n";
  o << "amplitude = " << num(c.initial.amplitude) << "\n";
  o << "modes = " << c.initial.modes << "\n";
  o << "seed = " << c.initial.seed << "\n";
  o << "[output]\n";
  o << "dir = " << c.out_dir << "\n";
  o << "[decay]\n";
  o << "tol = " << num(c.decay_tol) << "\n";
  o << "[llb]\n";
  o << "eps = " << list([&](int j) { return num(c.llb_eps[j]); }, static_cast<int>(c.llb_eps.size())) << "\n";
  o << "[ergodic]\n";
  o << "observable = " << observable_name(c.ergodic_observable) << "\n";
  o << "burn_in = " << num(c.ergodic_burn_in) << "\n";
  return o.str();
}

ExperimentConfig canonical(const ExperimentConfig& c) {
  ExperimentConfig k = c;
  k.workers = 1;
  k.out_dir.clear();
  return k;
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_text(canonical(c))) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SpectralField make_initial(const SpectralBasis& basis, const InitialCondition& ic) {
  using K = InitialCondition::Kind;
  SpectralField u(basis.mode_count());
  switch (ic.kind) {
    case K::zero: break;
    case K::constant: {
      // A constant c has coefficient c sqrt(|D|) on e_0 = 1/sqrt(|D|).
      const double root_vol = std::sqrt(basis.domain().volume());
      for (int c = 0; c < 3; ++c) u.comp(c)[0] = ic.value[c] * root_vol;
      break;
    }
    case K::single_mode: u.comp(ic.axis)[basis.index_of(ic.mode)] = ic.amplitude; break;
    case K::random_band_limited:
      for (std::size_t i = 0; i < basis.mode_count(); ++i) {
        const auto& k = basis.mode(i);
        double k2 = 0.0;
        bool inside = true;
        for (int a = 0; a < basis.dim(); ++a) {
          inside = inside && k[a] <= ic.modes;
          k2 += static_cast<double>(k[a]) * k[a];
        }
        if (!inside) continue;
        for (int c = 0; c < 3; ++c)
          u.comp(c)[i] = ic.amplitude * counter_normal(ic.seed, 0x1c0ffeeull, i, static_cast<std::uint32_t>(c)) /
                         (1.0 + k2);
      }
      break;
  }
  return u;
}

ResolvedExperiment resolve(const ExperimentConfig& c) {
  c.validate();
  SpectralBasis basis = build_basis(c.domain, std::span<const int>(c.cutoff.data(), c.domain.dim));
  NoiseFamily fam = build_noise_family(basis, c.noise);
  OperatorA A = make_operator_a(basis, c.model.lambda_r, c.model.lambda_e);
  SpectralField u0 = make_initial(basis, c.initial);
  const double mu = decay_rate(c.model, fam);
  return ResolvedExperiment{c, std::move(basis), std::move(fam), std::move(A), std::move(u0), config_hash(c), mu};
}

}  // namespace llbar
