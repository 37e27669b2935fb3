#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lbsgb/bandit.hpp"

namespace lbsgb {

/// Barrier strength η of the log-barrier term (1/η) Σ log π(a).
/// `none()` is the η = +∞ mode: every barrier contribution is skipped, not
/// multiplied by zero, so barrier-free rules share code paths bit-for-bit.
class Barrier {
 public:
  static Barrier none() noexcept { return Barrier(); }
  /// Throws std::invalid_argument unless eta > 0 (or +inf, which maps to none()).
  static Barrier of(double eta);

  bool active() const noexcept { return active_; }
  double eta() const noexcept {
    return active_ ? eta_ : std::numeric_limits<double>::infinity();
  }
  double inverse() const noexcept { return active_ ? 1.0 / eta_ : 0.0; }

  friend bool operator==(const Barrier&, const Barrier&) = default;

 private:
  Barrier() = default;
  double eta_ = std::numeric_limits<double>::infinity();
  bool active_ = false;
};

struct GradientReport {
  std::vector<double> grad_J;
  std::vector<double> grad_B;
  std::vector<double> grad_Phi;
  double norm_grad_Phi = 0.0;
};

struct StochasticGradient {
  std::vector<double> ghat;
  std::size_t action = 0;
  double reward = 0.0;
};

struct ObjectiveValue {
  double J = 0.0;
  double barrier = 0.0;
  double Phi = 0.0;
};

/// lhs <= rhs is the claimed inequality.
struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack() const noexcept { return rhs - lhs; }
};

/// πᵀr
double expected_reward(const BanditInstance& inst, std::span<const double> probs);

GradientReport exact_gradient(const BanditInstance& inst, const PolicyParams& pol,
                              Barrier barrier);

ObjectiveValue objective_value(const BanditInstance& inst, const PolicyParams& pol,
                               Barrier barrier);

/// Importance-sampling estimate for one (action, reward) pair:
///   ghat[a] = (1{a = action} - π(a)) reward + (1/η)(1 - K π(a)).
StochasticGradient stochastic_gradient(const BanditInstance& inst,
                                       const PolicyParams& pol, Barrier barrier,
                                       std::size_t action, double reward);

/// Allocation-free kernel behind stochastic_gradient; `out` has size K.
void stochastic_gradient_into(std::span<const double> probs, Barrier barrier,
                              std::size_t action, double reward,
                              std::span<double> out) noexcept;

/// Hessian of Φ_η with respect to θ.
Eigen::MatrixXd hessian(const BanditInstance& inst, const PolicyParams& pol,
                        Barrier barrier);

/// diag(π) - ππᵀ
Eigen::MatrixXd fim(const PolicyParams& pol);

/// (K-1)x(K-1) Fisher matrix of the softmax with the last preference pinned to
/// zero: diag(π̄) - π̄π̄ᵀ over the first K-1 probabilities.
Eigen::MatrixXd reparam_fim(const PolicyParams& pol);

/// log det of reparam_fim via Cholesky. Throws std::invalid_argument if any
/// probability is zero or the matrix is not numerically positive definite.
double reparam_fim_logdet(const PolicyParams& pol);

/// (π(a*)(r(a*) - πᵀr) - K/η)⁺
double lojasiewicz_lower_bound(const BanditInstance& inst, const PolicyParams& pol,
                               Barrier barrier);
/// Same with (K-1)/η.
double lojasiewicz_lower_bound_strict(const BanditInstance& inst,
                                      const PolicyParams& pol, Barrier barrier);

/// |yᵀHy| <= 3(‖∇Φ‖ + 5K/η)‖y‖²
BoundCheck smoothness_bound(const BanditInstance& inst, const PolicyParams& pol,
                            Barrier barrier, std::span<const double> y);

/// ‖ĝ‖ <= √2 Rmax (1 - π(action)) + 2K/η, with reward = means[action].
BoundCheck sample_grad_norm_bound(const BanditInstance& inst,
                                  const PolicyParams& pol, Barrier barrier,
                                  std::size_t action);

/// Exact K-term expectation under deterministic rewards:
///   E‖ĝ‖² <= C‖∇Φ‖ + (2K/η)(4K/η + C),  C = 16 Rmax³ K^{3/2} / Δ².
BoundCheck self_bounding(const BanditInstance& inst, const PolicyParams& pol,
                         Barrier barrier);

/// ‖∇Φ‖ <= r(a*) - πᵀr + 2K/η
BoundCheck grad_norm_upper(const BanditInstance& inst, const PolicyParams& pol,
                           Barrier barrier);
/// ‖∇Φ‖ <= √2 (r(a*) - πᵀr) + 2K/η
BoundCheck grad_norm_upper_sqrt2(const BanditInstance& inst, const PolicyParams& pol,
                                 Barrier barrier);

/// ((1 - η‖∇Φ‖)/K)⁺ <= π(a*). The left side is 0 without a barrier.
BoundCheck astar_lower_bound(const BanditInstance& inst, const PolicyParams& pol,
                             Barrier barrier);

/// Σ_a (log π'(a) - log π(a)) <= 2αK(√2 Rmax + 2K/η)
BoundCheck barrier_difference(const BanditInstance& inst, const PolicyParams& before,
                              const PolicyParams& after, double alpha,
                              Barrier barrier);

double euclidean_norm(std::span<const double> v) noexcept;

}  // namespace lbsgb
