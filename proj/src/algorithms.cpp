#include "lbsgb/algorithms.hpp"

#include <algorithm>
#include <cmath>

namespace lbsgb {

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::SGB:
      return "SGB";
    case AlgorithmKind::ENT:
      return "ENT";
    case AlgorithmKind::NPG:
      return "NPG";
    case AlgorithmKind::LBSGB:
      return "LBSGB";
  }
  return "?";
}

AlgorithmKind parse_algorithm(std::string_view text) {
  if (text == "SGB") return AlgorithmKind::SGB;
  if (text == "ENT") return AlgorithmKind::ENT;
  if (text == "NPG") return AlgorithmKind::NPG;
  if (text == "LBSGB" || text == "LB-SGB") return AlgorithmKind::LBSGB;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

std::string_view to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::Fixed:
      return "fixed";
    case ScheduleMode::ConvergenceRate:
      return "rate";
    case ScheduleMode::WorstCase:
      return "worst-case";
    case ScheduleMode::Regret:
      return "regret";
  }
  return "?";
}

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "fixed") return ScheduleMode::Fixed;
  if (text == "rate") return ScheduleMode::ConvergenceRate;
  if (text == "worst-case") return ScheduleMode::WorstCase;
  if (text == "regret") return ScheduleMode::Regret;
  throw std::invalid_argument("unknown schedule mode '" + std::string(text) + "'");
}

StepRule StepRule::sgb(double alpha) {
  StepRule r;
  r.kind = AlgorithmKind::SGB;
  r.alpha = alpha;
  r.validate();
  return r;
}

StepRule StepRule::ent(double alpha, double tau) {
  StepRule r;
  r.kind = AlgorithmKind::ENT;
  r.alpha = alpha;
  r.tau = tau;
  r.validate();
  return r;
}

StepRule StepRule::npg(double alpha) {
  StepRule r;
  r.kind = AlgorithmKind::NPG;
  r.alpha = alpha;
  r.validate();
  return r;
}

StepRule StepRule::lbsgb(double alpha, double eta) {
  StepRule r;
  r.kind = AlgorithmKind::LBSGB;
  r.alpha = alpha;
  r.barrier = Barrier::of(eta);
  r.validate();
  return r;
}

void StepRule::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("learning rate must be positive and finite");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("entropy temperature must be finite and >= 0");
  if (barrier.active() && kind != AlgorithmKind::LBSGB)
    throw std::invalid_argument("a finite eta is only meaningful for LBSGB");
  if (tau > 0.0 && kind != AlgorithmKind::ENT)
    throw std::invalid_argument("tau > 0 is only meaningful for ENT");
}

void apply_update(const StepRule& rule, PolicyParams& pol, std::size_t action,
                  double reward, std::vector<double>& scratch) {
  const std::size_t K = pol.arms();
  auto theta = pol.theta_mut();
  const auto pi = pol.probs();

  if (rule.kind == AlgorithmKind::NPG) {
    const double p = pi[action];
    if (!(p >= kNpgDivisionGuard))
      throw PolicyCollapse(action, p, "NPG: pulled-arm probability below division guard");
    theta[action] += rule.alpha * reward / p;
    if (!std::isfinite(theta[action]))
      throw PolicyCollapse(action, p, "NPG: non-finite preference");
  } else {
    double r = reward;
    if (rule.kind == AlgorithmKind::ENT && rule.tau > 0.0) r -= rule.tau * std::log(pi[action]);
    scratch.resize(K);
    stochastic_gradient_into(pi, rule.barrier, action, r, scratch);
    for (std::size_t a = 0; a < K; ++a) theta[a] += rule.alpha * scratch[a];
  }
  pol.center();
  pol.refresh();
}

Pull step_inplace(const StepRule& rule, const BanditInstance& inst,
                  PolicyParams& pol, RngStream& rng, std::vector<double>& scratch) {
  const Pull pull = sample_step(inst, pol, rng);
  apply_update(rule, pol, pull.action, pull.reward, scratch);
  return pull;
}

StepResult step(const StepRule& rule, const BanditInstance& inst,
                const PolicyParams& pol, RngStream& rng) {
  StepResult out{pol, 0, 0.0};
  std::vector<double> scratch;
  const Pull pull = step_inplace(rule, inst, out.policy, rng, scratch);
  out.action = pull.action;
  out.reward = pull.reward;
  return out;
}

double lr_smoothness_ceiling(std::size_t K, double r_max, Barrier barrier) {
  const double k = static_cast<double>(K);
  return 1.0 / (6.0 * (std::sqrt(2.0) * r_max + 2.0 * k * barrier.inverse()));
}

double lr_constant_schedule(std::size_t K, double delta_min, double r_max,
                            Barrier barrier) {
  const double k = static_cast<double>(K);
  return delta_min * delta_min /
         (30.0 * std::pow(k, 1.5) * r_max * r_max *
          (std::sqrt(2.0) * r_max + 2.0 * k * barrier.inverse()));
}

double lr_constant_schedule(const BanditInstance& inst, Barrier barrier) {
  return lr_constant_schedule(inst.arms(), inst.delta_min(), inst.r_max(), barrier);
}

DescentConstants descent_constants(std::size_t K, double r_max, Barrier barrier) {
  const double k = static_cast<double>(K);
  const double inv = barrier.inverse();
  DescentConstants c;
  c.B_tilde = 3.0 * k - 1.0;
  c.C_tilde = 4.0 * k * (8.0 * k * inv + inv) - 0.5 * inv * (k - 1.0) * (k - 1.0);
  c.b = c.B_tilde * r_max + c.C_tilde;
  return c;
}

Schedule theorem_schedule(std::size_t K, double r_max, double delta_min,
                          double initial_gap, const ScheduleSpec& spec) {
  const double k = static_cast<double>(K);
  Schedule s;
  switch (spec.mode) {
    case ScheduleMode::Fixed:
      throw std::invalid_argument("theorem_schedule: Fixed mode has no derived schedule");

    case ScheduleMode::WorstCase: {
      const double eps = spec.epsilon;
      if (!(eps > 0.0)) throw std::invalid_argument("theorem_schedule: epsilon must be > 0");
      s.eta = spec.c_eta * (k * k * k * k) / eps;
      s.alpha = spec.c_alpha * std::pow(k, -5.5) * (delta_min * delta_min) * eps * eps * eps;
      s.T_estimate = spec.c_T * std::pow(k, 8.5) / (delta_min * delta_min) / std::pow(eps, 7.0);
      return s;
    }

    case ScheduleMode::Regret: {
      const double T = spec.horizon;
      if (!(T > 0.0)) throw std::invalid_argument("theorem_schedule: horizon must be > 0");
      s.alpha = spec.c_alpha * std::pow(delta_min, 8.0 / 7.0) * std::pow(T, -3.0 / 7.0);
      s.eta = spec.c_eta * std::pow(delta_min, 2.0 / 7.0) * std::pow(T, 1.0 / 7.0);
      s.T_estimate = T;
      return s;
    }

    case ScheduleMode::ConvergenceRate: {
      const double eps = spec.epsilon;
      const double cs = spec.c_star;
      if (!(eps > 0.0)) throw std::invalid_argument("theorem_schedule: epsilon must be > 0");
      if (!(cs > 0.0)) throw std::invalid_argument("theorem_schedule: c_star must be > 0");
      if (!(initial_gap > 0.0))
        throw std::invalid_argument("theorem_schedule: initial gap must be > 0");
      // b(η) = B̃ Rmax + c1/η, so η = 8 c* ε⁻² b(η) is a quadratic in η.
      const double scale = 8.0 * cs / (eps * eps);
      const double B_tilde = 3.0 * k - 1.0;
      const double c1 = 32.0 * k * k + 4.0 * k - 0.5 * (k - 1.0) * (k - 1.0);
      const double A = scale * B_tilde * r_max;
      const double D = scale * c1;
      s.eta = spec.c_eta * 0.5 * (A + std::sqrt(A * A + 4.0 * D));

      const Barrier barrier = Barrier::of(s.eta);
      const double b = descent_constants(K, r_max, barrier).b;
      const double a1 = 3.0 * delta_min * delta_min /
                        (160.0 * std::pow(k, 1.5) * r_max * r_max *
                         (std::sqrt(2.0) * r_max + 2.0 * k / s.eta));
      const double a2 = cs / initial_gap;
      const double a3 = std::sqrt(s.eta * cs / (2.0 * b));
      s.alpha = spec.c_alpha * std::min({a1, a2, a3});
      const double logs = std::log(2.0 * initial_gap / eps);
      s.T_estimate = spec.c_T * std::max(0.0, std::sqrt(2.0 * s.eta * cs / (s.alpha * s.alpha * b)) * logs);
      return s;
    }
  }
  throw std::invalid_argument("theorem_schedule: unknown mode");
}

Schedule theorem_schedule(const BanditInstance& inst, const ScheduleSpec& spec) {
  double mean = 0.0;
  for (double m : inst.means()) mean += m;
  mean /= static_cast<double>(inst.arms());
  return theorem_schedule(inst.arms(), inst.r_max(), inst.delta_min(),
                          inst.best_mean() - mean, spec);
}

}  // namespace lbsgb
