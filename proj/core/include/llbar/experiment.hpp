#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llbar/config.hpp"
#include "llbar/diagnostics.hpp"

namespace llbar {

struct PathResult {
  std::uint64_t path_id = 0;
  std::uint64_t noise_checksum = 0;
  Trajectory records;
  CoupledRun run;  ///< coefficient snapshots, filled only when requested
  bool blew_up = false;
  std::uint64_t blowup_step = 0;
  double blowup_time = 0.0;
};

struct EnsembleOptions {
  int paths = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  int substeps = 1;           ///< see NoisePath::substeps
  std::uint64_t first_path = 0;
  bool keep_states = false;
};

/// Runs paths first_path .. first_path + paths - 1 on a pool of `workers`
/// threads. Results are ordered by path id and independent of scheduling.
/// Blow-ups are recorded per path; any other exception is rethrown.
std::vector<PathResult> run_ensemble(const SpectralBasis& basis, const SpectralField& u0, const ModelParams& p,
                                     const NoiseFamily& fam, const SchemeConfig& scheme,
                                     const EnsembleOptions& opt);

/// Ensemble options taken from the config.
EnsembleOptions ensemble_options(const ExperimentConfig& c);

/// `# key=value` lines opening every CSV.
std::string header_block(const std::vector<std::pair<std::string, std::string>>& entries);

void write_trajectory_csv(const std::filesystem::path& file, const ResolvedExperiment& r, const PathResult& path);
void write_ensemble_csv(const std::filesystem::path& file, const ResolvedExperiment& r,
                        const std::vector<PathResult>& paths);
void write_meta_json(const std::filesystem::path& file, const ResolvedExperiment& r,
                     const std::vector<PathResult>& paths, const std::string& command);
void write_decay_csv(const std::filesystem::path& file, const ResolvedExperiment& r, const DecayReport& rep);
void write_llb_csv(const std::filesystem::path& file, const ResolvedExperiment& r, const LlbLimitReport& rep,
                   std::uint64_t checksum_digest);

struct RunOutcome {
  std::vector<PathResult> paths;
  int blowups = 0;
  std::optional<DecayReport> decay;  ///< when the config satisfies the decay hypotheses
};

/// `run`: trajectories, ensemble summary, metadata and, where applicable, the decay report.
RunOutcome run_experiment(const ResolvedExperiment& r, const std::filesystem::path& out);

/// `decay-test`: throws HypothesisError if the config does not qualify.
DecayReport run_decay_test(const ResolvedExperiment& r, const std::filesystem::path& out);

/// `llb-limit`: coupled runs at lambda_e = 0 and every eps of the config.
LlbLimitReport run_llb_limit(const ResolvedExperiment& r, const std::filesystem::path& out);

/// Coupled snapshots of the given lambda_e over the configured ensemble.
std::vector<CoupledRun> coupled_runs(const ResolvedExperiment& r, double lambda_e);

}  // namespace llbar
