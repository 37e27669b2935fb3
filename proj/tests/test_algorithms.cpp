#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "lbsgb/algorithms.hpp"
#include "lbsgb/objective.hpp"

using namespace lbsgb;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("step rule construction and validation") {
  CHECK(StepRule::sgb(0.1).label() == "SGB");
  CHECK(StepRule::lbsgb(0.1, 100.0).barrier.eta() == 100.0);
  CHECK_FALSE(StepRule::lbsgb(0.1, kInf).barrier.active());
  CHECK_THROWS_AS(StepRule::sgb(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StepRule::sgb(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(StepRule::ent(0.1, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(StepRule::lbsgb(0.1, 0.0), std::invalid_argument);
  StepRule bad = StepRule::sgb(0.1);
  bad.barrier = Barrier::of(10.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = StepRule::npg(0.1);
  bad.tau = 0.2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK(parse_algorithm("LB-SGB") == AlgorithmKind::LBSGB);
  CHECK_THROWS_AS(parse_algorithm("PPO"), std::invalid_argument);
}

TEST_CASE("SGB update on two uniform arms") {
  PolicyParams pol(2);
  std::vector<double> scratch;
  apply_update(StepRule::sgb(0.1), pol, 0, 1.0, scratch);
  CHECK(pol.theta()[0] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(pol.theta()[1] == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("LBSGB at the uniform policy reduces to SGB") {
  for (std::size_t a = 0; a < 3; ++a) {
    PolicyParams x(3), y(3);
    std::vector<double> s;
    apply_update(StepRule::sgb(0.3), x, a, 0.7, s);
    apply_update(StepRule::lbsgb(0.3, 5.0), y, a, 0.7, s);
    CHECK(bit_equal(x.theta(), y.theta()));
  }
}

TEST_CASE("LBSGB adds the barrier term to every coordinate") {
  PolicyParams x(std::vector<double>{1.0, -0.5, 0.2}), y = x;
  std::vector<double> s;
  apply_update(StepRule::sgb(0.2), x, 1, 0.4, s);
  apply_update(StepRule::lbsgb(0.2, 4.0), y, 1, 0.4, s);
  PolicyParams ref(std::vector<double>{1.0, -0.5, 0.2});
  for (std::size_t a = 0; a < 3; ++a) {
    const double barrier = 0.2 * 0.25 * (1.0 - 3.0 * ref.prob(a));
    CHECK(y.theta()[a] - x.theta()[a] == doctest::Approx(barrier).epsilon(1e-12));
  }
}

TEST_CASE("NPG updates only the pulled coordinate before centering") {
  PolicyParams pol(2);
  std::vector<double> s;
  apply_update(StepRule::npg(0.1), pol, 0, 1.0, s);
  // +0.2 on arm 0, then centered.
  CHECK(pol.theta()[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(pol.theta()[1] == doctest::Approx(-0.1).epsilon(1e-15));

  RngStream rng(30, 0);
  for (int i = 0; i < 200; ++i) {
    const std::size_t K = 2 + rng.below(10);
    std::vector<double> theta(K);
    for (double& t : theta) t = rng.uniform(-3, 3);
    PolicyParams p(theta);
    p.center();
    p.refresh();
    const auto before = copy(p.theta());
    const std::size_t a = rng.below(K);
    const double R = rng.uniform(-2, 2);
    const double pa = p.prob(a);
    apply_update(StepRule::npg(0.05), p, a, R, s);
    // Undo centering: the shift is the same on every coordinate.
    const double shift = p.theta()[(a + 1) % K] - before[(a + 1) % K];
    std::size_t changed = 0;
    for (std::size_t b = 0; b < K; ++b) {
      const double d = p.theta()[b] - before[b] - shift;
      if (std::abs(d) > 1e-12) {
        ++changed;
        CHECK(b == a);
        CHECK(d == doctest::Approx(0.05 * R / pa).epsilon(1e-9));
      }
    }
    CHECK(changed <= 1);
  }
}

TEST_CASE("NPG signals collapse instead of dividing by a vanishing probability") {
  PolicyParams pol(std::vector<double>{0.0, -800.0});
  REQUIRE(pol.prob(1) < kNpgDivisionGuard);
  std::vector<double> s;
  CHECK_THROWS_AS(apply_update(StepRule::npg(0.1), pol, 1, 1.0, s), PolicyCollapse);
  try {
    apply_update(StepRule::npg(0.1), pol, 1, 1.0, s);
  } catch (const PolicyCollapse& e) {
    CHECK(e.action() == 1);
  }
}

TEST_CASE("ENT augments the reward with -tau log pi") {
  PolicyParams x(std::vector<double>{0.3, -0.4, 1.1}), y = x;
  std::vector<double> s;
  const double tau = 0.05, R = 0.6;
  apply_update(StepRule::ent(0.1, tau), x, 2, R, s);
  apply_update(StepRule::sgb(0.1), y, 2, R - tau * std::log(PolicyParams(std::vector<double>{0.3, -0.4, 1.1}).prob(2)), s);
  for (std::size_t a = 0; a < 3; ++a) CHECK(x.theta()[a] == doctest::Approx(y.theta()[a]).epsilon(1e-14));
}

TEST_CASE("trajectory equivalences on a shared stream") {
  RngStream gen(31, 0);
  const auto inst = make_instance(8, 1.0, 0.1, gen);
  const StepRule sgb = StepRule::sgb(0.2);
  const StepRule others[] = {StepRule::ent(0.2, 0.0), StepRule::lbsgb(0.2, kInf)};
  for (const StepRule& other : others) {
    PolicyParams a(8), b(8);
    RngStream ra(5, 5), rb(5, 5);
    std::vector<double> sa, sb;
    for (int t = 0; t < 5000; ++t) {
      const Pull pa = step_inplace(sgb, inst, a, ra, sa);
      const Pull pb = step_inplace(other, inst, b, rb, sb);
      REQUIRE(pa.action == pb.action);
      REQUIRE(pa.reward == pb.reward);
    }
    CHECK(bit_equal(a.theta(), b.theta()));
    CHECK(bit_equal(a.probs(), b.probs()));
  }
}

TEST_CASE("step returns a new policy and leaves the input untouched") {
  RngStream gen(32, 0);
  const auto inst = make_instance(4, 1.0, 0.2, gen);
  const PolicyParams pol(4);
  RngStream r1(1, 1), r2(1, 1);
  const StepResult res = step(StepRule::lbsgb(0.1, 50.0), inst, pol, r1);
  for (double t : pol.theta()) CHECK(t == 0.0);
  PolicyParams again(4);
  std::vector<double> s;
  const Pull p = step_inplace(StepRule::lbsgb(0.1, 50.0), inst, again, r2, s);
  CHECK(p.action == res.action);
  CHECK(bit_equal(again.theta(), res.policy.theta()));
}

TEST_CASE("property: every rule keeps the policy on the simplex and centered") {
  RngStream meta(33, 0);
  const StepRule rules[] = {StepRule::sgb(0.5), StepRule::ent(0.5, 0.1), StepRule::npg(0.5),
                            StepRule::lbsgb(0.5, 20.0)};
  for (const StepRule& rule : rules) {
    RngStream gen = meta.substream(static_cast<std::uint64_t>(rule.kind));
    const auto inst = make_instance(6, 2.0, 0.3, gen);
    PolicyParams pol(6);
    RngStream rng(7, static_cast<std::uint64_t>(rule.kind));
    std::vector<double> s;
    for (int t = 0; t < 3000; ++t) {
      try {
        step_inplace(rule, inst, pol, rng, s);
      } catch (const PolicyCollapse&) {
        break;
      }
      double sum = 0, mean = 0;
      for (double p : pol.probs()) sum += p;
      for (double th : pol.theta()) mean += th;
      REQUIRE(std::abs(sum - 1.0) <= 1e-12);
      REQUIRE(std::abs(mean / 6.0) <= 1e-9 * (1.0 + std::abs(pol.theta()[0])));
    }
  }
}

TEST_CASE("property: LB-SGB trajectories respect the optimal-arm bound and the barrier difference") {
  RngStream meta(34, 0);
  for (int run = 0; run < 6; ++run) {
    RngStream gen = meta.substream(static_cast<std::uint64_t>(run));
    const auto inst = make_instance(5, 1.0, 0.2, gen, NoiseModel::Deterministic);
    const double eta = run % 2 ? 50.0 : 500.0;
    const StepRule rule = StepRule::lbsgb(0.1, eta);
    PolicyParams pol(5);
    RngStream rng(3, static_cast<std::uint64_t>(run));
    std::vector<double> s;
    for (int t = 0; t < 5000; ++t) {
      const auto astar = astar_lower_bound(inst, pol, rule.barrier);
      REQUIRE(astar.slack() >= -1e-9);
      const PolicyParams before = pol;
      step_inplace(rule, inst, pol, rng, s);
      const auto diff = barrier_difference(inst, before, pol, rule.alpha, rule.barrier);
      REQUIRE(diff.slack() >= -1e-9);
    }
  }
}

TEST_CASE("constant learning rate") {
  const double alpha = lr_constant_schedule(4, 0.1, 1.0, Barrier::of(100.0));
  CHECK(alpha == doctest::Approx(0.01 / (30.0 * 8.0 * (std::sqrt(2.0) + 0.08))).epsilon(1e-14));
  CHECK(alpha == doctest::Approx(2.7886e-5).epsilon(1e-4));

  const double lim = lr_constant_schedule(2, 2.0, 1.0, Barrier::none());
  CHECK(lim == doctest::Approx(4.0 / (30.0 * std::pow(2.0, 1.5) * std::sqrt(2.0))).epsilon(1e-14));
  CHECK(lim <= 1.0 / (6.0 * std::sqrt(2.0)));

  RngStream rng(35, 0);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t K = 2 + rng.below(1000);
    const double r_max = rng.uniform(0.05, 10.0);
    const double delta = rng.uniform(1e-6, 2.0) * r_max;
    const double etas[] = {1.0, 10.0, 1e3, kInf};
    const Barrier b = Barrier::of(etas[rng.below(4)]);
    CHECK(lr_constant_schedule(K, delta, r_max, b) <= lr_smoothness_ceiling(K, r_max, b) + 1e-15);
  }

  const auto inst = BanditInstance::from_means({0.9, 0.8, 0.5, 0.0}, 1.0);
  // 0.9 - 0.8 is not exactly 0.1 in binary.
  CHECK(lr_constant_schedule(inst, Barrier::of(100.0)) == doctest::Approx(alpha).epsilon(1e-14));
}

TEST_CASE("descent constants") {
  const auto c = descent_constants(10, 1.0, Barrier::of(100.0));
  CHECK(c.B_tilde == 29.0);
  CHECK(c.C_tilde == doctest::Approx((40.0 * (0.8 + 0.01)) - 81.0 / 200.0).epsilon(1e-14));
  CHECK(c.b == doctest::Approx(29.0 + c.C_tilde));
  CHECK(descent_constants(10, 1.0, Barrier::none()).C_tilde == 0.0);
}

TEST_CASE("worst-case schedule exponents") {
  ScheduleSpec spec;
  spec.mode = ScheduleMode::WorstCase;
  spec.epsilon = 0.1;
  const auto a = theorem_schedule(10, 1.0, 0.05, 0.5, spec);
  spec.epsilon = 0.05;
  const auto b = theorem_schedule(10, 1.0, 0.05, 0.5, spec);
  CHECK(b.eta == 2.0 * a.eta);
  CHECK(b.alpha == a.alpha / 8.0);
  CHECK(b.T_estimate == doctest::Approx(128.0 * a.T_estimate).epsilon(1e-14));
  CHECK(a.eta == doctest::Approx(1e4 / 0.1));
  CHECK(a.alpha == doctest::Approx(std::pow(10.0, -5.5) * 0.0025 * 1e-3));

  spec.c_eta = 3.0;
  CHECK(theorem_schedule(10, 1.0, 0.05, 0.5, spec).eta == doctest::Approx(3.0 * b.eta));
  spec.epsilon = 0.0;
  CHECK_THROWS_AS(theorem_schedule(10, 1.0, 0.05, 0.5, spec), std::invalid_argument);
}

TEST_CASE("regret schedule exponents") {
  ScheduleSpec spec;
  spec.mode = ScheduleMode::Regret;
  spec.horizon = 1e5;
  const auto a = theorem_schedule(10, 1.0, 0.05, 0.5, spec);
  spec.horizon = 1e5 * 128.0;
  const auto b = theorem_schedule(10, 1.0, 0.05, 0.5, spec);
  CHECK(b.alpha == doctest::Approx(a.alpha / 8.0).epsilon(4e-16));
  CHECK(b.eta == doctest::Approx(2.0 * a.eta).epsilon(4e-16));
  CHECK(b.T_estimate == spec.horizon);
  spec.horizon = -1;
  CHECK_THROWS_AS(theorem_schedule(10, 1.0, 0.05, 0.5, spec), std::invalid_argument);
}

TEST_CASE("convergence-rate schedule") {
  ScheduleSpec spec;
  spec.mode = ScheduleMode::ConvergenceRate;
  spec.epsilon = 0.1;
  spec.c_star = 400.0;
  const auto s = theorem_schedule(10, 1.0, 0.05, 0.5, spec);
  CHECK(std::isfinite(s.eta));
  CHECK(s.eta > 0);
  // η is a fixed point of η = 8 b(η) c* ε⁻².
  const double b = descent_constants(10, 1.0, Barrier::of(s.eta)).b;
  CHECK(s.eta == doctest::Approx(8.0 * b * 400.0 * 100.0).epsilon(1e-12));
  const double a1 = 3 * 0.0025 / (160 * std::pow(10.0, 1.5) * (std::sqrt(2.0) + 20.0 / s.eta));
  CHECK(s.alpha == doctest::Approx(std::min({a1, 400.0 / 0.5, std::sqrt(s.eta * 400.0 / (2 * b))})));
  CHECK(s.T_estimate > 0);

  spec.mode = ScheduleMode::Fixed;
  CHECK_THROWS_AS(theorem_schedule(10, 1.0, 0.05, 0.5, spec), std::invalid_argument);
  spec.mode = ScheduleMode::ConvergenceRate;
  spec.c_star = 0;
  CHECK_THROWS_AS(theorem_schedule(10, 1.0, 0.05, 0.5, spec), std::invalid_argument);
}
