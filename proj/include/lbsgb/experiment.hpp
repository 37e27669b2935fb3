#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lbsgb/algorithms.hpp"
#include "lbsgb/bandit.hpp"
#include "lbsgb/rng.hpp"

namespace lbsgb {

struct Diagnostics {
  bool check_astar_bound = false;  // LBSGB only, checked before every step
  bool track_inv_pi_sq = false;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::size_t K = 10;
  double r_max = 1.0;
  double delta_star = 0.1;
  NoiseModel noise = NoiseModel::Gaussian;
  std::uint64_t T = 1000;
  std::size_t n_runs = 2;
  std::uint64_t record_every = 1000;
  std::uint64_t base_seed = 0;
  std::vector<StepRule> algorithms;
  Diagnostics diagnostics;

  /// Throws std::invalid_argument on any violated constraint.
  void validate() const;
};

inline constexpr std::uint64_t kMaxRecordedPoints = 100000;

/// Flat `key = value` text, `#` starts a comment. Keys: name, K, r_max,
/// delta_star, T, n_runs, record_every, base_seed, noise, algorithms (comma
/// list), alpha, eta, tau, check_astar_bound, track_inv_pi_sq, and per-rule
/// overrides `<ALG>.alpha`, `<ALG>.eta`, `<ALG>.tau`. eta applies to LBSGB and
/// tau to ENT. The result is validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& cfg);

struct RunSeries {
  std::string algorithm;
  std::size_t run_id = 0;
  std::vector<std::uint64_t> steps;
  std::vector<double> p_star;
  std::vector<double> cum_regret;
  bool collapsed = false;         // series stops at the last recorded step before collapse
  std::uint64_t collapse_step = 0;
  std::size_t astar_violations = 0;
  double astar_worst_slack = 0.0;
};

struct AggregateSeries {
  std::vector<std::uint64_t> steps;
  std::vector<double> mean;
  std::vector<double> half_width;

  friend bool operator==(const AggregateSeries&, const AggregateSeries&) = default;
};

/// The CSV view of an aggregate: step, mean, mean - hw, mean + hw.
struct SeriesTable {
  std::vector<std::uint64_t> steps;
  std::vector<double> mean;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;

  friend bool operator==(const SeriesTable&, const SeriesTable&) = default;
};
SeriesTable to_table(const AggregateSeries& agg);

struct AlgorithmResult {
  std::string algorithm;
  std::vector<RunSeries> runs;  // ordered by run_id
  AggregateSeries p_star;
  AggregateSeries regret;
  std::size_t n_collapsed = 0;
  std::size_t astar_violations = 0;
  double max_mean_inv_pi_sq = 0.0;  // only when track_inv_pi_sq
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<AlgorithmResult> algorithms;  // config order

  const AlgorithmResult& find(std::string_view label) const;
};

/// Recorded step indices: 0, s, 2s, ... and T.
std::vector<std::uint64_t> record_grid(std::uint64_t T, std::uint64_t record_every);

/// Stream identities. Every algorithm in run r faces the same instance; each
/// (algorithm, run) pair draws actions and noise from its own stream.
RngStream instance_stream(std::uint64_t base_seed, std::size_t run);
RngStream algorithm_stream(std::uint64_t base_seed, std::string_view label, std::size_t run);
BanditInstance run_instance(const ExperimentConfig& cfg, std::size_t run);

/// One trajectory from θ = 0.
RunSeries run_single(const ExperimentConfig& cfg, const StepRule& rule,
                     const BanditInstance& inst, std::size_t run);

/// Runs every (algorithm, run) pair on an OpenMP worker pool, then aggregates.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Single-threaded reference; produces identical results.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

enum class SeriesField { PStar, CumRegret };

/// Cross-run mean and 95% t-interval half width. Input order does not matter.
/// Collapsed series are extended with their last value; any other grid
/// mismatch is rejected.
AggregateSeries aggregate(std::vector<RunSeries> series,
                          SeriesField field = SeriesField::PStar);

/// Quantile of Student's t distribution.
double student_t_quantile(double p, double dof);

/// max over recorded steps of the cross-run mean of 1/p_star².
double max_mean_inv_pi_sq(const std::vector<RunSeries>& runs);

void emit_csv(const AggregateSeries& agg, const std::filesystem::path& path);
SeriesTable parse_csv(const std::filesystem::path& path);
std::string to_csv(const AggregateSeries& agg);

struct LabeledSeries {
  std::string label;
  const AggregateSeries* series;
};
/// Line chart of the means with the interval as a shaded band.
void emit_svg(const std::vector<LabeledSeries>& lines, const std::string& title,
              const std::filesystem::path& path);

void emit_run_csv(const RunSeries& run, const std::filesystem::path& path);

std::string summarize(const ExperimentResult& result);

/// Writes <dir>/<name>/{<ALG>_p_star.csv, <ALG>_regret.csv, p_star.svg,
/// regret.svg, runs/<ALG>_run<r>.csv, summary.txt}. Returns the experiment directory.
std::filesystem::path write_outputs(const ExperimentResult& result,
                                    const std::filesystem::path& dir);

/// $LBSGB_OUTPUT_DIR, or "out".
std::filesystem::path default_output_dir();

}  // namespace lbsgb
