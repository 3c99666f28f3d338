#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "llbar/diagnostics.hpp"
#include "llbar/field.hpp"
#include "llbar/field_ops.hpp"
#include "llbar/integrator.hpp"
#include "llbar/noise.hpp"
#include "llbar/spectral.hpp"

namespace llbar {

struct InitialCondition {
  enum class Kind { zero, constant, single_mode, random_band_limited };
  Kind kind = Kind::zero;
  Vec3 value{0.0, 0.0, 0.0};       ///< constant
  MultiIndex mode{0, 0, 0};        ///< single-mode
  int axis = 0;                    ///< single-mode
  double amplitude = 1.0;          ///< single-mode, random
  int modes = 4;                   ///< random: per-axis index bound
  std::uint64_t seed = 7;          ///< random
};

const char* initial_kind_name(InitialCondition::Kind k);

struct ExperimentConfig {
  std::string preset;
  BoxDomain domain;
  std::array<int, kMaxDim> cutoff{2, 0, 0};
  ModelParams model;
  NoiseSpec noise;
  SchemeConfig scheme;
  int paths = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  InitialCondition initial;
  std::string out_dir;
  double decay_tol = 0.05;
  std::vector<double> llb_eps{1e-1, 1e-2, 1e-3};
  Observable ergodic_observable = Observable::h1_sq;
  double ergodic_burn_in = 50.0;

  /// Checks every component invariant; throws ConfigError.
  void validate() const;
};

/// Strict parser: `key = value` lines under `[section]` headers, `#` comments,
/// an optional top-level `preset = name` applied before the remaining keys.
/// Unknown sections, unknown keys, duplicates and malformed values raise
/// ConfigError naming the line.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();
/// Throws ConfigError listing the available presets for an unknown name.
ExperimentConfig preset(const std::string& name);

/// Canonical `[section]` / `key = value` rendering of every value; parses back to the same values.
std::string to_text(const ExperimentConfig& c);
/// Copy with the execution-only settings (workers, output dir) reset; results depend only on this.
ExperimentConfig canonical(const ExperimentConfig& c);
/// FNV-1a of to_text(canonical(c)), as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// Initial coefficients on `basis`. Random fields draw from counter_normal with
/// the initial-condition seed, amplitude / (1 + |k|^2) per mode and component.
SpectralField make_initial(const SpectralBasis& basis, const InitialCondition& ic);

/// Everything derived from a validated config.
struct ResolvedExperiment {
  ExperimentConfig config;
  SpectralBasis basis;
  NoiseFamily noise;
  OperatorA A;
  SpectralField u0;
  std::string hash;
  double mu = 0.0;  ///< lambda_r - gamma^2 sigma_h^2 / 2
};

ResolvedExperiment resolve(const ExperimentConfig& c);

}  // namespace llbar
