// llbar: command-line driver for the stochastic LLBar spectral-Galerkin simulator.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "llbar/config.hpp"
#include "llbar/error.hpp"
#include "llbar/experiment.hpp"
#include "llbar/selftest.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kBlowUp = 3;
constexpr int kCheckFailed = 4;

struct Overrides {
  int paths = 0;
  long long seed = -1;
  int workers = 0;
  std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--paths", o.paths, "Ensemble size M")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed S of the noise paths")->check(CLI::NonNegativeNumber);
  cmd->add_option("--workers", o.workers, "Worker threads W")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory (default: $LLBAR_OUT/<name> or ./llbar_out/<name>)");
}

// `preset:<name>` selects a built-in preset, anything else is a config file.
llbar::ExperimentConfig load(const std::string& source, std::string& name) {
  if (source.rfind("preset:", 0) == 0) {
    name = source.substr(7);
    return llbar::preset(name);
  }
  name = std::filesystem::path(source).stem().string();
  return llbar::load_config(source);
}

std::filesystem::path output_dir(const llbar::ExperimentConfig& c, const Overrides& o, const std::string& name) {
  if (!o.out.empty()) return o.out;
  if (!c.out_dir.empty()) return c.out_dir;
  const char* env = std::getenv("LLBAR_OUT");
  return std::filesystem::path(env && *env ? env : "llbar_out") / name;
}

llbar::ResolvedExperiment prepare(const std::string& source, const Overrides& o, std::filesystem::path& out) {
  std::string name;
  llbar::ExperimentConfig c = load(source, name);
  if (o.paths > 0) c.paths = o.paths;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (o.workers > 0) c.workers = o.workers;
  out = output_dir(c, o, name);
  return llbar::resolve(c);
}

void print_resolved(const llbar::ResolvedExperiment& r, const std::filesystem::path& out) {
  std::printf("config_hash=%s modes=%zu beta0=%s sigma_g2=%s sigma_h2=%s mu=%s\n", r.hash.c_str(),
              r.basis.mode_count(), llbar::format_double(r.A.beta0).c_str(),
              llbar::format_double(r.noise.sigma_g2).c_str(), llbar::format_double(r.noise.sigma_h2).c_str(),
              llbar::format_double(r.mu).c_str());
  std::printf("output: %s\n", out.string().c_str());
}

int cmd_run(const std::string& source, const Overrides& o) {
  std::filesystem::path out;
  const auto r = prepare(source, o, out);
  print_resolved(r, out);
  const auto res = llbar::run_experiment(r, out);
  std::printf("paths=%zu blowups=%d\n", res.paths.size(), res.blowups);
  if (res.decay)
    std::printf("decay: mu=%s violations=%d worst_excess=%s\n", llbar::format_double(res.decay->mu_theoretical).c_str(),
                res.decay->violations, llbar::format_double(res.decay->worst_excess).c_str());
  for (const auto& p : res.paths)
    if (p.blew_up)
      std::fprintf(stderr, "path %llu: numerical blow-up at step %llu (t = %g)\n",
                   static_cast<unsigned long long>(p.path_id), static_cast<unsigned long long>(p.blowup_step),
                   p.blowup_time);
  return res.blowups > 0 ? kBlowUp : kOk;
}

int cmd_decay(const std::string& source, const Overrides& o) {
  std::filesystem::path out;
  const auto r = prepare(source, o, out);
  print_resolved(r, out);
  const auto rep = llbar::run_decay_test(r, out);
  std::printf("decay: mu=%s tol=%s paths=%zu violations=%d worst_excess=%s empirical_rate=%s\n",
              llbar::format_double(rep.mu_theoretical).c_str(), llbar::format_double(rep.tol).c_str(),
              rep.max_ratio.size(), rep.violations, llbar::format_double(rep.worst_excess).c_str(),
              llbar::format_double(rep.empirical_rate).c_str());
  return rep.violations == 0 ? kOk : kCheckFailed;
}

int cmd_llb(const std::string& source, const Overrides& o) {
  std::filesystem::path out;
  const auto r = prepare(source, o, out);
  print_resolved(r, out);
  const auto rep = llbar::run_llb_limit(r, out);
  for (std::size_t i = 0; i < rep.eps.size(); ++i)
    std::printf("eps=%s error=%s ci_half=%s\n", llbar::format_double(rep.eps[i]).c_str(),
                llbar::format_double(rep.error[i].mean).c_str(), llbar::format_double(rep.error[i].ci_half).c_str());
  std::printf("strictly_decreasing=%s slope=%s\n", rep.strictly_decreasing ? "true" : "false",
              llbar::format_double(rep.slope).c_str());
  return rep.strictly_decreasing ? kOk : kCheckFailed;
}

int cmd_selftest(std::uint64_t seed, int seeds, bool flip) {
  bool ok = true;
  for (int s = 0; s < seeds; ++s) {
    llbar::SelftestOptions opt;
    opt.seed = seed + static_cast<std::uint64_t>(s);
    opt.flip_field_sign = flip;
    const auto rep = llbar::run_selftest(opt);
    std::printf("selftest seed=%llu (%.2f s)\n", static_cast<unsigned long long>(opt.seed), rep.seconds);
    for (const auto& c : rep.checks)
      std::printf("  %-4s %-48s residual=%.3e tol=%.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                  c.tolerance);
    ok = ok && rep.pass();
  }
  std::printf("%s\n", ok ? "selftest passed" : "selftest FAILED");
  return ok ? kOk : kCheckFailed;
}

int cmd_presets(const std::string& name) {
  if (name.empty()) {
    for (const auto& n : llbar::preset_names()) std::printf("%s\n", n.c_str());
    return kOk;
  }
  std::printf("%s", llbar::to_text(llbar::preset(name)).c_str());
  return kOk;
}

int cmd_info() {
  std::printf("llbar %s\n", LLBAR_VERSION);
  std::printf("fft backend: %s\n", llbar::fft_backend_version());
  std::printf("trajectory columns: %s\n", std::string(llbar::kTrajectoryColumns).c_str());
  std::printf("presets:");
  for (const auto& n : llbar::preset_names()) std::printf(" %s", n.c_str());
  std::printf("\nexit codes: 0 ok, 2 config error, 3 numerical blow-up, 4 selftest/acceptance failure\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Galerkin simulator for the stochastic Landau-Lifshitz-Baryakhtar equation"};
  app.require_subcommand(1);

  Overrides o;
  std::string source;
  auto* run = app.add_subcommand("run", "Run an ensemble and write trajectories, ensemble.csv and meta.json");
  run->add_option("config", source, "Config file or preset:<name>")->required();
  add_overrides(run, o);

  auto* decay = app.add_subcommand("decay-test", "Run the ensemble and check the pathwise decay bound");
  decay->add_option("config", source, "Config file or preset:<name>")->required();
  add_overrides(decay, o);

  auto* llb = app.add_subcommand("llb-limit", "Error curve of coupled lambda_e = eps runs against lambda_e = 0");
  llb->add_option("config", source, "Config file or preset:<name>")->required();
  add_overrides(llb, o);

  std::uint64_t st_seed = llbar::SelftestOptions{}.seed;
  int st_seeds = 1;
  bool flip = false;
  auto* st = app.add_subcommand("selftest", "Identity suite on random band-limited fields");
  st->add_option("--seed", st_seed, "Seed of the random fields");
  st->add_option("--seeds", st_seeds, "Number of consecutive seeds to run")->check(CLI::PositiveNumber);
  st->add_flag("--inject-sign-flip", flip, "Test hook: corrupt the drift")->group("");

  std::string preset_name;
  auto* pr = app.add_subcommand("presets", "List presets, or print one resolved preset");
  pr->add_option("name", preset_name, "Preset to print");

  auto* info = app.add_subcommand("info", "Version, backend and output schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(source, o);
    if (*decay) return cmd_decay(source, o);
    if (*llb) return cmd_llb(source, o);
    if (*st) return cmd_selftest(st_seed, st_seeds, flip);
    if (*pr) return cmd_presets(preset_name);
    if (*info) return cmd_info();
  } catch (const llbar::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const llbar::HypothesisError& e) {
    std::fprintf(stderr, "hypothesis violation: %s\n", e.what());
    return kConfigError;
  } catch (const llbar::BlowUpError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kBlowUp;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
