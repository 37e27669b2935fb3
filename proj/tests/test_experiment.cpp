#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lbsgb/experiment.hpp"
#include "lbsgb/objective.hpp"

using namespace lbsgb;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(
# small mixed run
name = tiny
K = 3
r_max = 1
delta_star = 0.2
noise = gaussian
T = 200
n_runs = 4
record_every = 50
base_seed = 42
algorithms = SGB, LBSGB, ENT
alpha = 0.1
eta = 100
tau = 0.01
)";

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lbsgb_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunSeries series(std::size_t id, std::vector<double> p) {
  RunSeries rs;
  rs.algorithm = "SGB";
  rs.run_id = id;
  for (std::size_t i = 0; i < p.size(); ++i) rs.steps.push_back(i * 10);
  rs.p_star = p;
  rs.cum_regret.assign(p.size(), 0.0);
  return rs;
}

// Student t density integrated by composite Simpson, inverted by bisection.
double t_cdf_simpson(double x, double nu) {
  const double c = std::exp(std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2)) /
                   std::sqrt(nu * std::numbers::pi);
  auto f = [&](double t) { return c * std::pow(1 + t * t / nu, -(nu + 1) / 2); };
  // Substitute t = tan(u) to cover the heavy tail on a finite interval.
  const double a = 0.0, b = std::atan(x);
  const int n = 20000;
  const double h = (b - a) / n;
  auto g = [&](double u) { const double t = std::tan(u); return f(t) * (1 + t * t); };
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += g(a + i * h) * (i % 2 ? 4 : 2);
  return 0.5 + s * h / 3;
}

double t_quantile_oracle(double p, double nu) {
  double lo = 0.0, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf_simpson(mid, nu) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(kTinyConfig);
  CHECK(cfg.name == "tiny");
  CHECK(cfg.K == 3);
  CHECK(cfg.T == 200);
  CHECK(cfg.n_runs == 4);
  CHECK(cfg.base_seed == 42);
  REQUIRE(cfg.algorithms.size() == 3);
  CHECK(cfg.algorithms[0].kind == AlgorithmKind::SGB);
  CHECK(cfg.algorithms[1].kind == AlgorithmKind::LBSGB);
  CHECK(cfg.algorithms[1].barrier.eta() == 100.0);
  CHECK(cfg.algorithms[2].tau == 0.01);

  const auto big = parse_config("K = 10\nT = 5e6\nrecord_every = 1000\nalgorithms = LB-SGB\n"
                                "alpha = 0.1\nLBSGB.eta = 1000\nLBSGB.alpha = 0.01\n");
  CHECK(big.T == 5000000);
  CHECK(big.algorithms[0].alpha == 0.01);
  CHECK(big.algorithms[0].barrier.eta() == 1000.0);
}

TEST_CASE("config errors") {
  const std::string base = "K = 3\nT = 10\nrecord_every = 1\nalpha = 0.1\n";
  CHECK_THROWS_AS(parse_config(base), std::invalid_argument);  // no algorithms
  CHECK_THROWS_WITH(parse_config(base + "algorithms = LBSGB\n"), doctest::Contains("eta"));
  CHECK_THROWS_WITH(parse_config(base + "algorithms = ENT\n"), doctest::Contains("tau"));
  CHECK_THROWS_WITH(parse_config(base + "algorithms = SGB\nbogus = 1\n"), doctest::Contains("bogus"));
  CHECK_THROWS_WITH(parse_config(base + "algorithms = SGB\nK = 4\n"), doctest::Contains("duplicate"));
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB, SGB\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = PPO\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB\nn_runs = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB\nSGB.alpha = -1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB\nT = 1e6\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("K = 3\nT = 1e6\nrecord_every = 1\nalpha = 0.1\nalgorithms = SGB\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB\nnoise = loud\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + "algorithms = SGB\ngarbage line\n"), std::invalid_argument);
  CHECK_THROWS_WITH(load_config("/nonexistent/x.cfg"), doctest::Contains("/nonexistent/x.cfg"));
}

TEST_CASE("config format round trip") {
  const ExperimentConfig cfg = parse_config(kTinyConfig);
  const std::string text = format_config(cfg);
  const ExperimentConfig again = parse_config(text);
  CHECK(format_config(again) == text);
  CHECK(again.algorithms[1].barrier.eta() == cfg.algorithms[1].barrier.eta());

  ExperimentConfig inf = cfg;
  inf.algorithms[1] = StepRule::lbsgb(0.1, std::numeric_limits<double>::infinity());
  CHECK_FALSE(parse_config(format_config(inf)).algorithms[1].barrier.active());
}

TEST_CASE("record grid") {
  CHECK(record_grid(10, 5) == std::vector<std::uint64_t>{0, 5, 10});
  CHECK(record_grid(10, 3) == std::vector<std::uint64_t>{0, 3, 6, 9, 10});
  CHECK(record_grid(1, 1000) == std::vector<std::uint64_t>{0, 1});
  CHECK_THROWS_AS(record_grid(10, 0), std::invalid_argument);
}

TEST_CASE("t quantile against tabulated values and an integration oracle") {
  CHECK(student_t_quantile(0.975, 1) == doctest::Approx(12.706205).epsilon(1e-6));
  CHECK(student_t_quantile(0.975, 99) == doctest::Approx(1.984217).epsilon(1e-6));
  for (double nu : {2.0, 4.0, 9.0, 19.0, 49.0}) {
    CAPTURE(nu);
    CHECK(std::abs(student_t_quantile(0.975, nu) - t_quantile_oracle(0.975, nu)) < 1e-6);
  }
  CHECK_THROWS_AS(student_t_quantile(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(student_t_quantile(0.5, 0), std::invalid_argument);
}

TEST_CASE("aggregate examples") {
  const auto agg = aggregate({series(0, {0.0, 0.0}), series(1, {1.0, 1.0})});
  CHECK(agg.mean[0] == 0.5);
  CHECK(agg.half_width[0] == doctest::Approx(12.706205 * std::sqrt(0.5) / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(agg.half_width[0] == doctest::Approx(6.353).epsilon(1e-3));

  const auto same = aggregate({series(0, {0.3, 0.7}), series(1, {0.3, 0.7}), series(2, {0.3, 0.7})});
  CHECK(same.mean == std::vector<double>{0.3, 0.7});
  CHECK(same.half_width == std::vector<double>{0.0, 0.0});

  CHECK_THROWS_AS(aggregate({series(0, {0.1})}), std::invalid_argument);
  auto shifted = series(1, {0.1, 0.2});
  shifted.steps = {0, 11};
  CHECK_THROWS_AS(aggregate({series(0, {0.1, 0.2}), shifted}), std::invalid_argument);
  CHECK_THROWS_AS(aggregate({series(0, {0.1, 0.2}), series(1, {0.1})}), std::invalid_argument);

  auto collapsed = series(1, {0.4});
  collapsed.collapsed = true;
  const auto carry = aggregate({series(0, {0.2, 0.6}), collapsed});
  CHECK(carry.steps.size() == 2);
  CHECK(carry.mean[1] == doctest::Approx(0.5));
}

TEST_CASE("property: aggregate is invariant to input order") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    const std::size_t len = 1 + rng.below(20);
    std::vector<RunSeries> runs;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> v(len);
      for (double& x : v) x = rng.uniform();
      runs.push_back(series(r, v));
    }
    const auto a = aggregate(runs);
    for (std::size_t i = n; i > 1; --i) std::swap(runs[i - 1], runs[rng.below(i)]);
    CHECK(aggregate(runs) == a);
    // Two-pass statistics against a long-double reference.
    for (std::size_t i = 0; i < len; ++i) {
      long double s = 0;
      for (const auto& rs : runs) s += rs.p_star[i];
      CHECK(std::abs(a.mean[i] - static_cast<double>(s / n)) < 1e-15);
      CHECK(a.half_width[i] >= 0.0);
    }
  }
}

TEST_CASE("experiments are deterministic and independent of scheduling") {
  const ExperimentConfig cfg = parse_config(kTinyConfig);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  const auto s = run_experiment_serial(cfg);
  REQUIRE(a.algorithms.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.algorithms[i].p_star == b.algorithms[i].p_star);
    CHECK(a.algorithms[i].p_star == s.algorithms[i].p_star);
    CHECK(a.algorithms[i].regret == s.algorithms[i].regret);
  }
  CHECK(a.algorithms[0].algorithm == "SGB");
  CHECK(a.algorithms[0].runs.size() == 4);
  CHECK(a.algorithms[0].p_star.steps == std::vector<std::uint64_t>{0, 50, 100, 150, 200});

  // Reordering the algorithms leaves each series unchanged.
  ExperimentConfig swapped = cfg;
  std::reverse(swapped.algorithms.begin(), swapped.algorithms.end());
  const auto r = run_experiment(swapped);
  for (const char* label : {"SGB", "LBSGB", "ENT"})
    CHECK(r.find(label).p_star == a.find(label).p_star);
  CHECK_THROWS_AS(a.find("NPG"), std::out_of_range);

  // Same instance across algorithms within a run.
  for (std::size_t run = 0; run < cfg.n_runs; ++run)
    CHECK(run_instance(cfg, run).means().size() == cfg.K);
  CHECK(run_instance(cfg, 1).means()[0] == run_instance(cfg, 1).means()[0]);
  CHECK(algorithm_stream(42, "SGB", 0) != algorithm_stream(42, "ENT", 0));
  CHECK(algorithm_stream(42, "SGB", 0) != algorithm_stream(42, "SGB", 1));
}

TEST_CASE("recorded series agree with an independent replay") {
  ExperimentConfig cfg = parse_config(kTinyConfig);
  cfg.noise = NoiseModel::Deterministic;
  cfg.record_every = 1;
  const auto res = run_experiment(cfg);
  for (const auto& alg : res.algorithms) {
    const StepRule& rule = *std::find_if(cfg.algorithms.begin(), cfg.algorithms.end(),
                                         [&](const StepRule& r) { return r.label() == alg.algorithm; });
    for (const RunSeries& rs : alg.runs) {
      const BanditInstance inst = run_instance(cfg, rs.run_id);
      PolicyParams pol(cfg.K);
      RngStream rng = algorithm_stream(cfg.base_seed, rule.label(), rs.run_id);
      std::vector<double> scratch(cfg.K);
      double regret = 0.0;
      for (std::uint64_t t = 1; t <= cfg.T; ++t) {
        const auto pull = step_inplace(rule, inst, pol, rng, scratch);
        // Deterministic rewards equal the arm means.
        CHECK(pull.reward == inst.means()[pull.action]);
        regret += inst.best_mean() - inst.means()[pull.action];
        CHECK(rs.cum_regret[t] == regret);
        CHECK(rs.p_star[t] == pol.prob(inst.opt_arm()));
      }
      for (std::size_t i = 1; i < rs.cum_regret.size(); ++i)
        CHECK(rs.cum_regret[i] >= rs.cum_regret[i - 1]);
    }
  }
}

TEST_CASE("two-arm LB-SGB at the constant learning rate moves toward the best arm") {
  ExperimentConfig cfg;
  cfg.name = "two_arm";
  cfg.K = 2;
  cfg.r_max = 1.0;
  cfg.delta_star = 0.5;
  cfg.noise = NoiseModel::Deterministic;
  cfg.T = 1000;
  cfg.n_runs = 2;
  cfg.record_every = 100;
  const double eta = 10.0;
  const double alpha = lr_constant_schedule(2, 1.0, 0.5, Barrier::of(eta)) * 2000.0;
  cfg.algorithms = {StepRule::lbsgb(std::min(alpha, 0.5), eta)};
  const auto res = run_experiment(cfg);
  for (const auto& rs : res.algorithms[0].runs) CHECK(rs.p_star.back() > 0.5);
}

TEST_CASE("csv emit and parse") {
  const fs::path dir = scratch_dir("csv");
  const auto agg = aggregate({series(0, {0.1, 1.0 / 3.0}), series(1, {0.2, 2.0 / 3.0})});
  emit_csv(agg, dir / "a.csv");
  const SeriesTable t = parse_csv(dir / "a.csv");
  CHECK(t == to_table(agg));
  CHECK(slurp(dir / "a.csv").rfind("step,mean,ci_lo,ci_hi\n", 0) == 0);

  AggregateSeries empty;
  CHECK_THROWS_AS(emit_csv(empty, dir / "empty.csv"), std::invalid_argument);
  CHECK_FALSE(fs::exists(dir / "empty.csv"));

  std::ofstream(dir / "blocker") << "x";
  CHECK_THROWS_WITH(emit_csv(agg, dir / "blocker" / "a.csv"), doctest::Contains("blocker"));
  CHECK_THROWS_AS(parse_csv(dir / "missing.csv"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("write_outputs lays out the experiment directory") {
  const fs::path dir = scratch_dir("out");
  const auto res = run_experiment(parse_config(kTinyConfig));
  const fs::path exp = write_outputs(res, dir);
  CHECK(exp == dir / "tiny");
  for (const char* f : {"SGB_p_star.csv", "LBSGB_regret.csv", "ENT_p_star.csv", "p_star.svg",
                        "regret.svg", "summary.txt", "runs/SGB_run0.csv", "runs/ENT_run3.csv"})
    CHECK(fs::exists(exp / f));
  CHECK(parse_csv(exp / "LBSGB_p_star.csv") == to_table(res.find("LBSGB").p_star));
  CHECK(slurp(exp / "p_star.svg").find("<svg") != std::string::npos);
  CHECK(slurp(exp / "summary.txt").find("LBSGB") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("golden outputs are reproduced byte for byte") {
  const fs::path golden = LBSGB_GOLDEN_DIR;
  const auto cfg = load_config(golden / "tiny.cfg");
  const auto res = run_experiment(cfg);
  for (const auto& alg : res.algorithms) {
    CHECK(to_csv(alg.p_star) == slurp(golden / (alg.algorithm + "_p_star.csv")));
    CHECK(to_csv(alg.regret) == slurp(golden / (alg.algorithm + "_regret.csv")));
  }
}

TEST_CASE("diagnostics") {
  ExperimentConfig cfg = parse_config(kTinyConfig);
  cfg.diagnostics.check_astar_bound = true;
  cfg.diagnostics.track_inv_pi_sq = true;
  const auto res = run_experiment(cfg);
  CHECK(res.find("LBSGB").astar_violations == 0);
  CHECK(res.find("SGB").astar_violations == 0);
  for (const auto& rs : res.find("LBSGB").runs) CHECK(rs.astar_worst_slack >= -1e-9);
  for (const auto& alg : res.algorithms) {
    CHECK(alg.max_mean_inv_pi_sq >= 9.0 - 1e-9);  // uniform start gives 1/π² = K²
    CHECK(alg.max_mean_inv_pi_sq == max_mean_inv_pi_sq(alg.runs));
  }
  std::vector<RunSeries> runs{series(0, {0.5, 0.25}), series(1, {0.5, 0.5})};
  CHECK(max_mean_inv_pi_sq(runs) == doctest::Approx(10.0));
}
