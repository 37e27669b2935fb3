#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lbsgb/bandit.hpp"
#include "lbsgb/objective.hpp"
#include "lbsgb/rng.hpp"

namespace lbsgb {

enum class BoundId {
  Smoothness,
  Lojasiewicz,
  LojasiewiczStrict,  // (K-1)/η variant
  SelfBounding,
  SampleGradNorm,
  GradNormUpper,
  GradNormUpperSqrt2,  // √2 (r* - πᵀr) + 2K/η variant
  AstarLower,
  FimLogdet,
  Unbiasedness,
};

std::string_view to_string(BoundId id);
BoundId parse_bound(std::string_view text);
std::span<const BoundId> all_bounds() noexcept;

struct BoundSweepReport {
  std::size_t n_points = 0;
  std::size_t n_violations = 0;
  double worst_slack = 0.0;  // min of rhs - lhs

  friend bool operator==(const BoundSweepReport&, const BoundSweepReport&) = default;
};

/// Relative tolerance applied to the bound sweeps: slack < -1e-9 max(1, |rhs|).
inline constexpr double kBoundRelTol = 1e-9;
inline constexpr double kFimLogdetTol = 1e-9;
inline constexpr double kUnbiasedTol = 1e-12;

/// Random point for the bound sweeps: K ∈ {2,3,5,10,50}, θ ∈ [-8,8]^K,
/// Rmax ∈ {0.5,1,3}, means uniform in [-Rmax,Rmax] with minimum gap >= 1e-3 Rmax,
/// η ∈ {10,1e2,1e3,1e4}, a standard-normal direction y and a uniform action.
/// Rewards are deterministic so expectations are exact K-term sums.
struct SweepState {
  BanditInstance inst;
  PolicyParams pol;
  Barrier barrier;
  std::vector<double> y;
  std::size_t action = 0;
};
SweepState random_sweep_state(RngStream& rng);

/// Random policy with K ∈ {2..8} and min π >= 1e-4.
PolicyParams random_fim_policy(RngStream& rng);

/// Evaluates one bound at one point; lhs <= rhs is the claim.
BoundCheck evaluate_bound(BoundId id, RngStream& point_rng);

/// Point i uses seed.substream(i), so the report is independent of the thread
/// count. sweep_bound runs points in parallel; sweep_bound_serial is the
/// single-threaded reference.
BoundSweepReport sweep_bound(BoundId id, std::size_t n, const RngStream& seed);
BoundSweepReport sweep_bound_serial(BoundId id, std::size_t n, const RngStream& seed);

BoundSweepReport check_fim_identity(std::size_t n, const RngStream& seed);
BoundSweepReport check_unbiasedness(std::size_t n, const RngStream& seed);

struct RecurrenceParams {
  double a = 1.0;
  double b = 1.0;
  double eta = 1.0;
  double alpha = 0.1;
  double r0 = 0.0;

  /// √(2b/(ηa))
  double rho_bar() const;
  void validate() const;
};

/// ρ_{t+1} = ρ_t - α(a/2)ρ_t² + αb/η from ρ_0 = r0. Requires
/// α <= 1/(a max(r0, ρ̄)); the error message names the limiting α.
std::vector<double> recurrence_rho(const RecurrenceParams& p, std::size_t T);

/// ν_{t+1} = (1 - αaρ̄/2)ν_t + αb/η from ν_0 = r0. Requires r0 >= ρ̄ and α <= 1/(a r0).
std::vector<double> recurrence_nu(const RecurrenceParams& p, std::size_t T);

/// (1 - ½√(2α²ab/η))^t r0 + ρ̄. Requires α <= √(η/(2ab)).
double nu_closed_form_bound(const RecurrenceParams& p, std::size_t t);

/// |x - y| / max(1, |x|, |y|)
double relative_error(double x, double y) noexcept;

/// Central differences of Φ_η in θ.
std::vector<double> fd_gradient(const BanditInstance& inst, std::span<const double> theta,
                                Barrier barrier, double h = 1e-5);

/// Central differences of the analytic gradient in θ.
Eigen::MatrixXd fd_hessian(const BanditInstance& inst, std::span<const double> theta,
                           Barrier barrier, double h = 1e-5);

struct FdReport {
  std::size_t n_points = 0;
  std::size_t n_violations = 0;
  double max_rel_error = 0.0;
};

/// Random states with K ∈ {2,3,5,10}, θ ∈ [-5,5]^K, η drawn from `etas`
/// (+inf allowed).
struct FdState {
  BanditInstance inst;
  std::vector<double> theta;
  Barrier barrier;
};
FdState random_fd_state(RngStream& rng, std::span<const double> etas);

FdReport check_gradient_fd(std::size_t n, const RngStream& seed,
                           std::span<const double> etas, double tol);
FdReport check_hessian_fd(std::size_t n, const RngStream& seed,
                          std::span<const double> etas, double tol);

}  // namespace lbsgb
