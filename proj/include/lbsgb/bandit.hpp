#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lbsgb/rng.hpp"

namespace lbsgb {

enum class NoiseModel {
  Gaussian,       ///< reward = mean + N(0, 1)
  Deterministic,  ///< reward = mean
};

std::string_view to_string(NoiseModel noise);
NoiseModel parse_noise_model(std::string_view text);

/// A stationary K-armed bandit. Immutable after construction; every derived
/// field is recomputed from the means and checked at construction.
class BanditInstance {
 public:
  /// Builds an instance from explicit means. Throws std::invalid_argument if
  /// K < 2, r_max <= 0, some |mean| > r_max, or two means tie.
  static BanditInstance from_means(std::vector<double> means, double r_max,
                                   NoiseModel noise = NoiseModel::Gaussian);

  std::size_t arms() const noexcept { return means_.size(); }
  std::span<const double> means() const noexcept { return means_; }
  double mean(std::size_t a) const { return means_.at(a); }
  double r_max() const noexcept { return r_max_; }
  double delta_star() const noexcept { return delta_star_; }
  double delta_min() const noexcept { return delta_min_; }
  std::size_t opt_arm() const noexcept { return opt_arm_; }
  double best_mean() const noexcept { return means_[opt_arm_]; }
  NoiseModel noise() const noexcept { return noise_; }

  /// Same means, different noise model.
  BanditInstance with_noise(NoiseModel noise) const;

  /// Recomputes a*, the gaps, the support bound and the no-ties condition and
  /// compares them with the stored fields. Returns an empty string when valid.
  std::string validate() const;

  /// Provenance of generated instances; zero for hand-built ones.
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  void set_provenance(std::uint64_t seed, std::uint64_t stream_id) noexcept {
    seed_ = seed;
    stream_id_ = stream_id;
  }

 private:
  BanditInstance() = default;

  std::vector<double> means_;
  double r_max_ = 0.0;
  double delta_star_ = 0.0;
  double delta_min_ = 0.0;
  std::size_t opt_arm_ = 0;
  NoiseModel noise_ = NoiseModel::Gaussian;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

/// Generates a seeded instance: the optimal arm (index 0) sits at 0.9 r_max,
/// arm 1 at delta_star below it, and the remaining arms are drawn uniformly
/// in [-r_max, best - delta_star] and then nudged apart so every pairwise gap
/// is at least delta_star / (10 K).
BanditInstance make_instance(std::size_t K, double r_max, double delta_star,
                             RngStream& rng,
                             NoiseModel noise = NoiseModel::Gaussian);

/// Single-line text record: `K=.. r_max=.. delta_star=.. seed=.. stream=..
/// noise=.. means=m0,m1,...` with 17 significant digits.
std::string serialize(const BanditInstance& inst);
BanditInstance parse_instance(std::string_view record);

/// Overflow-safe softmax. Throws std::invalid_argument on non-finite input.
std::vector<double> softmax(std::span<const double> theta);

/// Writes softmax(theta) into `out` (same size) without validation.
void softmax_into(std::span<const double> theta, std::span<double> out) noexcept;

/// Action preferences and the softmax policy they induce.
class PolicyParams {
 public:
  explicit PolicyParams(std::size_t K);  // theta = 0, uniform policy
  explicit PolicyParams(std::vector<double> theta);

  std::size_t arms() const noexcept { return theta_.size(); }
  std::span<const double> theta() const noexcept { return theta_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double prob(std::size_t a) const { return probs_.at(a); }

  void set_theta(std::span<const double> theta);

  /// Mutable access for in-place update kernels; call refresh() afterwards.
  std::span<double> theta_mut() noexcept { return theta_; }
  void refresh() noexcept { softmax_into(theta_, probs_); }

  /// theta <- theta - mean(theta). Leaves probs unchanged up to rounding.
  void center() noexcept;

 private:
  std::vector<double> theta_;
  std::vector<double> probs_;
};

struct Pull {
  std::size_t action = 0;
  double reward = 0.0;
};

/// Inverse-CDF action draw on one uniform variate.
std::size_t sample_action(std::span<const double> probs, double u) noexcept;

/// Draws an action from the policy and a reward from the instance.
Pull sample_step(const BanditInstance& inst, const PolicyParams& pol,
                 RngStream& rng);

}  // namespace lbsgb
