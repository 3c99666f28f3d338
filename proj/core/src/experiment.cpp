#include "llbar/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "llbar/error.hpp"

namespace llbar {

namespace fs = std::filesystem;

std::vector<PathResult> run_ensemble(const SpectralBasis& basis, const SpectralField& u0, const ModelParams& p,
                                     const NoiseFamily& fam, const SchemeConfig& scheme,
                                     const EnsembleOptions& opt) {
  if (opt.paths < 1) throw ConfigError("paths must be at least 1");
  if (opt.workers < 1) throw ConfigError("workers must be at least 1");
  if (opt.substeps < 1) throw ConfigError("substeps must be at least 1");
  std::vector<PathResult> out(static_cast<std::size_t>(opt.paths));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (int m = next++; m < opt.paths; m = next++) {
      PathResult& res = out[static_cast<std::size_t>(m)];
      res.path_id = opt.first_path + static_cast<std::uint64_t>(m);
      res.run.lambda_e = p.lambda_e;
      const NoisePath path{opt.seed, res.path_id, scheme.dt, opt.substeps};
      auto sink = [&](const TrajectoryState& s) {
        res.records.push_back(record(basis, s, p, fam));
        if (opt.keep_states) {
          res.run.times.push_back(s.t);
          res.run.states.push_back(s.u);
        }
      };
      try {
        const IntegrationResult r = integrate(basis, u0, scheme, p, fam, path, sink);
        res.noise_checksum = r.noise_checksum;
        res.run.noise_checksum = r.noise_checksum;
      } catch (const BlowUpError& e) {
        res.blew_up = true;
        res.blowup_step = e.step();
        res.blowup_time = e.time();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  const int n_threads = std::min(opt.workers, opt.paths);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

EnsembleOptions ensemble_options(const ExperimentConfig& c) {
  EnsembleOptions o;
  o.paths = c.paths;
  o.seed = c.seed;
  o.workers = c.workers;
  return o;
}

namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t digest(const std::vector<PathResult>& paths) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : paths)
    for (int b = 0; b < 8; ++b) {
      h ^= (p.noise_checksum >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  return h;
}

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + file.string() + "'");
  return f;
}

std::vector<std::pair<std::string, std::string>> common_header(const ResolvedExperiment& r) {
  return {{"config_hash", r.hash},
          {"preset", r.config.preset.empty() ? "none" : r.config.preset},
          {"beta0", format_double(r.A.beta0)},
          {"sigma_g2", format_double(r.noise.sigma_g2)},
          {"sigma_h2", format_double(r.noise.sigma_h2)},
          {"mu", format_double(r.mu)}};
}

}  // namespace

std::string header_block(const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string out;
  for (const auto& [k, v] : entries) out += "# " + k + "=" + v + "\n";
  return out;
}

void write_trajectory_csv(const fs::path& file, const ResolvedExperiment& r, const PathResult& path) {
  auto h = common_header(r);
  h.emplace_back("path_id", std::to_string(path.path_id));
  h.emplace_back("seed", std::to_string(r.config.seed));
  h.emplace_back("noise_checksum", hex64(path.noise_checksum));
  h.emplace_back("status", path.blew_up ? "blow-up at step " + std::to_string(path.blowup_step) : "ok");
  std::ofstream f = open_out(file);
  f << header_block(h) << kTrajectoryColumns << "\n";
  for (const auto& rec : path.records) f << csv_row(rec) << "\n";
}

void write_ensemble_csv(const fs::path& file, const ResolvedExperiment& r, const std::vector<PathResult>& paths) {
  std::vector<const PathResult*> ok;
  for (const auto& p : paths)
    if (!p.blew_up) ok.push_back(&p);
  auto h = common_header(r);
  h.emplace_back("paths", std::to_string(ok.size()));
  h.emplace_back("noise_checksum", hex64(digest(paths)));
  std::ofstream f = open_out(file);
  f << header_block(h);
  f << "t,paths,mean_norm_u_L2_sq,ci_norm_u_L2_sq,mean_norm_u_H1_sq,ci_norm_u_H1_sq,mean_psi,ci_psi,"
       "mean_quad_var,ci_quad_var\n";
  if (ok.empty()) return;
  const std::size_t rows = ok.front()->records.size();
  const Observable obs[] = {Observable::l2_sq, Observable::h1_sq, Observable::psi};
  for (std::size_t i = 0; i < rows; ++i) {
    std::string line = format_double(ok.front()->records[i].t) + "," + std::to_string(ok.size());
    auto stat = [&](auto value) {
      std::vector<double> x;
      for (const auto* p : ok) x.push_back(value(p->records[i]));
      double mean = 0.0;
      for (double v : x) mean += v;
      mean /= x.size();
      double ss = 0.0;
      for (double v : x) ss += (v - mean) * (v - mean);
      const double ci = x.size() > 1 ? 1.96 * std::sqrt(ss / (x.size() - 1)) / std::sqrt(double(x.size())) : 0.0;
      line += "," + format_double(mean) + "," + format_double(ci);
    };
    for (Observable o : obs) stat([o](const DiagnosticsRecord& rec) { return observe(o, rec); });
    stat([](const DiagnosticsRecord& rec) { return rec.quad_var; });
    f << line << "\n";
  }
}

void write_meta_json(const fs::path& file, const ResolvedExperiment& r, const std::vector<PathResult>& paths,
                     const std::string& command) {
  nlohmann::ordered_json j;
  const auto& c = r.config;
  j["command"] = command;
  j["config_hash"] = r.hash;
  j["preset"] = c.preset;
  j["beta0"] = r.A.beta0;
  j["lambda0"] = r.A.lambda0;
  j["sigma_g2"] = r.noise.sigma_g2;
  j["sigma_h2"] = r.noise.sigma_h2;
  j["mu"] = r.mu;
  j["modes"] = r.basis.mode_count();
  j["steps"] = c.scheme.step_count();
  j["columns"] = std::string(kTrajectoryColumns);
  j["noise_checksum"] = hex64(digest(paths));
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : paths) {
    nlohmann::ordered_json e;
    e["path_id"] = p.path_id;
    e["noise_checksum"] = hex64(p.noise_checksum);
    e["status"] = p.blew_up ? "blow-up" : "ok";
    if (p.blew_up) {
      e["blowup_step"] = p.blowup_step;
      e["blowup_time"] = p.blowup_time;
    }
    arr.push_back(e);
  }
  j["paths"] = arr;
  j["resolved_config"] = to_text(canonical(c));
  std::ofstream f = open_out(file);
  f << j.dump(2) << "\n";
}

void write_decay_csv(const fs::path& file, const ResolvedExperiment& r, const DecayReport& rep) {
  auto h = common_header(r);
  h.emplace_back("tol", format_double(rep.tol));
  h.emplace_back("violations", std::to_string(rep.violations));
  h.emplace_back("worst_excess", format_double(rep.worst_excess));
  h.emplace_back("empirical_rate", format_double(rep.empirical_rate));
  std::ofstream f = open_out(file);
  f << header_block(h);
  f << "path,max_ratio,violation\n";
  for (std::size_t m = 0; m < rep.max_ratio.size(); ++m)
    f << m << "," << format_double(rep.max_ratio[m]) << "," << (rep.max_ratio[m] > 1.0 + rep.tol ? 1 : 0) << "\n";
  f << "summary,mu_theoretical=" << format_double(rep.mu_theoretical) << ",violations=" << rep.violations << "\n";
}

void write_llb_csv(const fs::path& file, const ResolvedExperiment& r, const LlbLimitReport& rep,
                   std::uint64_t checksum_digest) {
  auto h = common_header(r);
  h.emplace_back("noise_checksum", hex64(checksum_digest));
  h.emplace_back("slope", format_double(rep.slope));
  h.emplace_back("strictly_decreasing", rep.strictly_decreasing ? "true" : "false");
  std::ofstream f = open_out(file);
  f << header_block(h);
  f << "eps,mean_error,ci_half,sd,paths\n";
  for (std::size_t i = 0; i < rep.eps.size(); ++i)
    f << format_double(rep.eps[i]) << "," << format_double(rep.error[i].mean) << ","
      << format_double(rep.error[i].ci_half) << "," << format_double(rep.error[i].sd) << "," << rep.error[i].paths
      << "\n";
}

namespace {

std::string path_dir(std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "path_%04llu", static_cast<unsigned long long>(id));
  return buf;
}

std::vector<PathResult> run_and_write(const ResolvedExperiment& r, const fs::path& out, const std::string& cmd) {
  const auto& c = r.config;
  auto paths = run_ensemble(r.basis, r.u0, c.model, r.noise, c.scheme, ensemble_options(c));
  for (const auto& p : paths) write_trajectory_csv(out / path_dir(p.path_id) / "trajectory.csv", r, p);
  write_ensemble_csv(out / "ensemble.csv", r, paths);
  write_meta_json(out / "meta.json", r, paths, cmd);
  return paths;
}

std::vector<Trajectory> completed(const std::vector<PathResult>& paths) {
  std::vector<Trajectory> t;
  for (const auto& p : paths)
    if (!p.blew_up) t.push_back(p.records);
  return t;
}

}  // namespace

RunOutcome run_experiment(const ResolvedExperiment& r, const fs::path& out) {
  RunOutcome res;
  res.paths = run_and_write(r, out, "run");
  for (const auto& p : res.paths) res.blowups += p.blew_up ? 1 : 0;
  bool qualifies = true;
  try {
    require_decay_hypotheses(r.config.model, r.noise);
  } catch (const HypothesisError&) {
    qualifies = false;
  }
  const auto done = completed(res.paths);
  if (qualifies && !done.empty()) {
    res.decay = check_pathwise_decay(done, r.config.model, r.noise, r.config.decay_tol);
    write_decay_csv(out / "decay.csv", r, *res.decay);
  }
  return res;
}

DecayReport run_decay_test(const ResolvedExperiment& r, const fs::path& out) {
  require_decay_hypotheses(r.config.model, r.noise);
  const auto paths = run_and_write(r, out, "decay-test");
  for (const auto& p : paths)
    if (p.blew_up) throw BlowUpError(p.blowup_step, p.blowup_time);
  DecayReport rep = check_pathwise_decay(completed(paths), r.config.model, r.noise, r.config.decay_tol);
  write_decay_csv(out / "decay.csv", r, rep);
  return rep;
}

std::vector<CoupledRun> coupled_runs(const ResolvedExperiment& r, double lambda_e) {
  ModelParams p = r.config.model;
  p.lambda_e = lambda_e;
  EnsembleOptions opt = ensemble_options(r.config);
  opt.keep_states = true;
  auto paths = run_ensemble(r.basis, r.u0, p, r.noise, r.config.scheme, opt);
  std::vector<CoupledRun> runs;
  for (auto& path : paths) {
    if (path.blew_up) throw BlowUpError(path.blowup_step, path.blowup_time);
    runs.push_back(std::move(path.run));
  }
  return runs;
}

LlbLimitReport run_llb_limit(const ResolvedExperiment& r, const fs::path& out) {
  const auto reference = coupled_runs(r, 0.0);
  std::vector<std::vector<CoupledRun>> runs;
  for (double eps : r.config.llb_eps) runs.push_back(coupled_runs(r, eps));
  const LlbLimitReport rep = llb_limit_error(r.basis, r.config.model.lambda_r, reference, runs);
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& run : reference)
    for (int b = 0; b < 8; ++b) {
      h ^= (run.noise_checksum >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  write_llb_csv(out / "llb_limit.csv", r, rep, h);
  return rep;
}

}  // namespace llbar
