#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbsgb/algorithms.hpp"
#include "lbsgb/experiment.hpp"
#include "lbsgb/format.hpp"
#include "lbsgb/oracles.hpp"

namespace fs = std::filesystem;
using namespace lbsgb;

namespace {

fs::path preset_dir() {
  if (const char* env = std::getenv("LBSGB_PRESET_DIR"); env && *env) return env;
  return LBSGB_PRESET_DIR;
}

fs::path resolve_config(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const fs::path preset = preset_dir() / (arg + ".cfg");
  if (fs::exists(preset)) return preset;
  throw std::runtime_error("no config file or preset named '" + arg + "'");
}

std::string first_comment(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() == '#') return std::string(trim(t.substr(1)));
  }
  return {};
}

int cmd_run(const std::string& target, const std::string& out_dir, bool serial,
            std::uint64_t horizon, std::size_t runs) {
  ExperimentConfig cfg = load_config(resolve_config(target));
  if (horizon) cfg.T = horizon;
  if (runs) cfg.n_runs = runs;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = serial ? run_experiment_serial(cfg) : run_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = write_outputs(res, out_dir.empty() ? default_output_dir() : fs::path(out_dir));
  std::cout << summarize(res);
  std::printf("wrote %s (%.1f s)\n", dir.string().c_str(), secs);
  for (const AlgorithmResult& ar : res.algorithms)
    if (ar.astar_violations) return 1;
  return 0;
}

int cmd_verify(std::size_t n, std::uint64_t seed) {
  bool ok = true;
  const RngStream base(seed, 0);
  for (BoundId id : all_bounds()) {
    const BoundSweepReport rep = sweep_bound(id, n, base.substream(static_cast<std::uint64_t>(id)));
    std::printf("%-22s n=%zu violations=%zu worst_slack=%.6e\n", std::string(to_string(id)).c_str(),
                rep.n_points, rep.n_violations, rep.worst_slack);
    ok = ok && rep.n_violations == 0;
  }
  return ok ? 0 : 1;
}

int cmd_presets() {
  std::vector<fs::path> files;
  if (fs::exists(preset_dir()))
    for (const auto& e : fs::directory_iterator(preset_dir()))
      if (e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files)
    std::printf("%-34s %s\n", p.stem().string().c_str(), first_comment(p).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Softmax policy-gradient bandit experiments and bound checks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment config or bundled preset");
  std::string target, out_dir;
  bool serial = false;
  std::uint64_t horizon = 0;
  std::size_t runs = 0;
  run->add_option("config", target, "config file path or preset name")->required();
  run->add_option("--out", out_dir, "output directory (default $LBSGB_OUTPUT_DIR or ./out)");
  run->add_flag("--serial", serial, "single-threaded reference runner");
  run->add_option("--horizon", horizon, "override T");
  run->add_option("--runs", runs, "override n_runs");

  auto* verify = app.add_subcommand("verify", "random-point sweeps of every bound");
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  verify->add_option("--n", n, "points per bound")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "sweep seed");

  auto* presets = app.add_subcommand("presets", "list bundled configs");

  auto* sched = app.add_subcommand("schedule", "derive (alpha, eta, T) from the convergence theorems");
  std::string mode;
  ScheduleSpec spec;
  std::size_t K = 10;
  double r_max = 1.0, delta = 0.1, delta0 = 0.0;
  sched->add_option("--mode", mode, "worst-case | regret | rate")
      ->required()
      ->check(CLI::IsMember({"worst-case", "regret", "rate"}));
  auto* eps_opt = sched->add_option("--epsilon", spec.epsilon, "target accuracy");
  auto* hor_opt = sched->add_option("--horizon", spec.horizon, "horizon T (regret mode)");
  eps_opt->excludes(hor_opt);
  sched->add_option("--K", K, "number of arms");
  sched->add_option("--rmax", r_max, "reward bound");
  sched->add_option("--delta", delta, "minimum pairwise gap");
  sched->add_option("--delta0", delta0, "initial sub-optimality gap (rate mode, default rmax)");
  sched->add_option("--c-star", spec.c_star, "estimate of sup E[1/pi(a*)^2] (rate mode, default 4K^2)");
  sched->add_option("--c-alpha", spec.c_alpha, "constant on alpha");
  sched->add_option("--c-eta", spec.c_eta, "constant on eta");
  sched->add_option("--c-T", spec.c_T, "constant on T");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(target, out_dir, serial, horizon, runs);
    if (*verify) return cmd_verify(n, seed);
    if (*presets) return cmd_presets();
    if (*sched) {
      spec.mode = parse_schedule_mode(mode);
      if (spec.mode == ScheduleMode::Regret ? hor_opt->count() == 0 : eps_opt->count() == 0)
        throw std::invalid_argument(mode == "regret" ? "--horizon is required" : "--epsilon is required");
      if (spec.c_star == 0.0) spec.c_star = 4.0 * static_cast<double>(K * K);
      const Schedule s = theorem_schedule(K, r_max, delta, delta0 > 0.0 ? delta0 : r_max, spec);
      std::printf("alpha=%s\neta=%s\nT_estimate=%s\n", format_double(s.alpha).c_str(),
                  format_double(s.eta).c_str(), format_double(s.T_estimate).c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
