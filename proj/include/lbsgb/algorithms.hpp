#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lbsgb/bandit.hpp"
#include "lbsgb/objective.hpp"
#include "lbsgb/rng.hpp"

namespace lbsgb {

enum class AlgorithmKind { SGB, ENT, NPG, LBSGB };

std::string_view to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm(std::string_view text);

enum class ScheduleMode { Fixed, ConvergenceRate, WorstCase, Regret };

std::string_view to_string(ScheduleMode mode);
ScheduleMode parse_schedule_mode(std::string_view text);

/// One update rule with its hyperparameters.
struct StepRule {
  AlgorithmKind kind = AlgorithmKind::SGB;
  double alpha = 0.0;
  Barrier barrier = Barrier::none();  // LBSGB only
  double tau = 0.0;                   // ENT only
  ScheduleMode provenance = ScheduleMode::Fixed;

  static StepRule sgb(double alpha);
  static StepRule ent(double alpha, double tau);
  static StepRule npg(double alpha);
  static StepRule lbsgb(double alpha, double eta);

  std::string_view label() const noexcept { return to_string(kind); }

  /// Throws std::invalid_argument if alpha <= 0, tau < 0, or a barrier/entropy
  /// parameter is attached to a rule that does not use it.
  void validate() const;
};

/// NPG divided by a vanishing probability or produced non-finite preferences.
class PolicyCollapse : public std::runtime_error {
 public:
  PolicyCollapse(std::size_t action, double prob, const std::string& what)
      : std::runtime_error(what), action_(action), prob_(prob) {}
  std::size_t action() const noexcept { return action_; }
  double prob() const noexcept { return prob_; }

 private:
  std::size_t action_;
  double prob_;
};

inline constexpr double kNpgDivisionGuard = 1e-300;

struct StepResult {
  PolicyParams policy;
  std::size_t action = 0;
  double reward = 0.0;
};

/// Samples (a_t, R_t), applies the rule, centers θ. Throws PolicyCollapse.
StepResult step(const StepRule& rule, const BanditInstance& inst,
                const PolicyParams& pol, RngStream& rng);

/// In-place variant for long trajectories. `scratch` is resized as needed.
Pull step_inplace(const StepRule& rule, const BanditInstance& inst,
                  PolicyParams& pol, RngStream& rng, std::vector<double>& scratch);

/// Applies the rule for a given (action, reward) without sampling.
void apply_update(const StepRule& rule, PolicyParams& pol, std::size_t action,
                  double reward, std::vector<double>& scratch);

/// Δ²/(30 K^{3/2} Rmax² (√2 Rmax + 2K/η)) with Δ the minimum pairwise gap.
double lr_constant_schedule(const BanditInstance& inst, Barrier barrier);
double lr_constant_schedule(std::size_t K, double delta_min, double r_max,
                            Barrier barrier);

/// 1/(6(√2 Rmax + 2K/η)), the step-size ceiling the constant schedule must respect.
double lr_smoothness_ceiling(std::size_t K, double r_max, Barrier barrier);

/// Constants of the descent recurrence r_{t+1} <= r_t - (α/2c*) r_t² + (α/η) b:
/// B̃ = 3K - 1, C̃ = 4K(8K + 1)/η - (K - 1)²/(2η), b = B̃ Rmax + C̃.
struct DescentConstants {
  double B_tilde = 0.0;
  double C_tilde = 0.0;
  double b = 0.0;
};
DescentConstants descent_constants(std::size_t K, double r_max, Barrier barrier);

struct ScheduleSpec {
  ScheduleMode mode = ScheduleMode::WorstCase;
  double epsilon = 0.0;  // WorstCase, ConvergenceRate
  double horizon = 0.0;  // Regret
  double c_star = 0.0;   // ConvergenceRate: caller's estimate of sup E[1/π(a*)²]
  // Hidden constants of the order statements.
  double c_alpha = 1.0;
  double c_eta = 1.0;
  double c_T = 1.0;
};

struct Schedule {
  double alpha = 0.0;
  double eta = 0.0;
  double T_estimate = 0.0;
};

/// ConvergenceRate: η solves η = 8 b(η) c* ε⁻² (b depends on η through C̃),
///   α = min{3Δ²/(160 K^{3/2} Rmax² (√2 Rmax + 2K/η)), c*/δ0, √(η c*/(2b))},
///   T = √(2η c*/(α² b)) log(2δ0/ε), with δ0 the uniform policy's gap.
/// WorstCase: η = c_η K⁴/ε, α = c_α K^{-11/2} Δ² ε³, T = c_T K^{17/2} Δ⁻² ε⁻⁷.
/// Regret: α = c_α Δ^{8/7} T^{-3/7}, η = c_η Δ^{2/7} T^{1/7}.
/// Throws std::invalid_argument for Fixed mode, ε <= 0, T <= 0 or c* <= 0.
Schedule theorem_schedule(const BanditInstance& inst, const ScheduleSpec& spec);

/// Same, from the instance summary only.
Schedule theorem_schedule(std::size_t K, double r_max, double delta_min,
                          double initial_gap, const ScheduleSpec& spec);

}  // namespace lbsgb
