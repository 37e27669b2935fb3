#include "lbsgb/bandit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lbsgb/format.hpp"

namespace lbsgb {

std::string_view to_string(NoiseModel noise) {
  switch (noise) {
    case NoiseModel::Gaussian:
      return "gaussian";
    case NoiseModel::Deterministic:
      return "deterministic";
  }
  return "unknown";
}

NoiseModel parse_noise_model(std::string_view text) {
  if (text == "gaussian") return NoiseModel::Gaussian;
  if (text == "deterministic") return NoiseModel::Deterministic;
  throw std::invalid_argument("unknown noise model '" + std::string(text) + "'");
}

namespace {

struct Gaps {
  std::size_t opt = 0;
  double delta_star = 0.0;
  double delta_min = 0.0;
};

Gaps compute_gaps(std::span<const double> means) {
  Gaps g;
  g.opt = static_cast<std::size_t>(
      std::max_element(means.begin(), means.end()) - means.begin());
  g.delta_star = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < means.size(); ++a)
    if (a != g.opt) g.delta_star = std::min(g.delta_star, means[g.opt] - means[a]);
  std::vector<double> sorted(means.begin(), means.end());
  std::sort(sorted.begin(), sorted.end());
  g.delta_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i)
    g.delta_min = std::min(g.delta_min, sorted[i] - sorted[i - 1]);
  return g;
}

}  // namespace

BanditInstance BanditInstance::from_means(std::vector<double> means,
                                          double r_max, NoiseModel noise) {
  if (means.size() < 2)
    throw std::invalid_argument("a bandit needs at least 2 arms");
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw std::invalid_argument("r_max must be positive and finite");
  for (double m : means) {
    if (!std::isfinite(m) || std::abs(m) > r_max)
      throw std::invalid_argument("mean " + format_double(m) +
                                  " outside [-r_max, r_max]");
  }
  const Gaps g = compute_gaps(means);
  if (!(g.delta_min > 0.0))
    throw std::invalid_argument("mean rewards must be pairwise distinct");

  BanditInstance inst;
  inst.means_ = std::move(means);
  inst.r_max_ = r_max;
  inst.opt_arm_ = g.opt;
  inst.delta_star_ = g.delta_star;
  inst.delta_min_ = g.delta_min;
  inst.noise_ = noise;
  return inst;
}

BanditInstance BanditInstance::with_noise(NoiseModel noise) const {
  BanditInstance copy = *this;
  copy.noise_ = noise;
  return copy;
}

std::string BanditInstance::validate() const {
  if (means_.size() < 2) return "fewer than 2 arms";
  for (double m : means_)
    if (!(std::abs(m) <= r_max_)) return "mean outside [-r_max, r_max]";
  const Gaps g = compute_gaps(means_);
  if (!(g.delta_min > 0.0)) return "tied means";
  if (g.opt != opt_arm_) return "stored optimal arm is not the argmax";
  if (g.delta_star != delta_star_) return "stored delta_star mismatch";
  if (g.delta_min != delta_min_) return "stored delta_min mismatch";
  return {};
}

BanditInstance make_instance(std::size_t K, double r_max, double delta_star,
                             RngStream& rng, NoiseModel noise) {
  if (K < 2) throw std::invalid_argument("make_instance: K must be >= 2");
  if (!(r_max > 0.0)) throw std::invalid_argument("make_instance: r_max must be > 0");
  if (!(delta_star > 0.0) || !(delta_star < 2.0 * r_max))
    throw std::invalid_argument(
        "make_instance: delta_star must lie in (0, 2 r_max)");

  const double best = 0.9 * r_max;
  const double second = best - delta_star;
  if (second < -r_max)
    throw std::invalid_argument(
        "make_instance: second arm would fall below -r_max (need delta_star <= "
        "1.9 r_max)");

  const double floor_gap = delta_star / (10.0 * static_cast<double>(K));
  const std::size_t rest = K - 2;
  if (rest > 0 && second + r_max < static_cast<double>(rest) * floor_gap)
    throw std::invalid_argument(
        "make_instance: no room for the remaining arms at the required gap");

  std::vector<double> means(K);
  means[0] = best;
  means[1] = second;
  if (rest > 0) {
    std::vector<double> draws(rest);
    for (double& d : draws) d = rng.uniform(-r_max, second);

    // Order-preserving adjustment onto {x_i >= -r_max, x_i <= second - gap,
    // x_{i+1} - x_i >= gap}: cap from the top, then lift from the bottom.
    std::vector<std::size_t> order(rest);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return draws[a] < draws[b]; });
    std::vector<double> x(rest);
    for (std::size_t i = 0; i < rest; ++i) x[i] = draws[order[i]];
    double cap = second - floor_gap;
    for (std::size_t i = rest; i-- > 0;) {
      x[i] = std::min(x[i], cap);
      cap = x[i] - floor_gap;
    }
    double lift = -r_max;
    for (std::size_t i = 0; i < rest; ++i) {
      x[i] = std::max(x[i], lift);
      lift = x[i] + floor_gap;
    }
    for (std::size_t i = 0; i < rest; ++i) means[2 + order[i]] = x[i];
  }

  BanditInstance inst = BanditInstance::from_means(std::move(means), r_max, noise);
  inst.set_provenance(rng.seed(), rng.stream_id());
  return inst;
}

std::string serialize(const BanditInstance& inst) {
  std::string out = "K=" + std::to_string(inst.arms());
  out += " r_max=" + format_double(inst.r_max());
  out += " delta_star=" + format_double(inst.delta_star());
  out += " seed=" + std::to_string(inst.seed());
  out += " stream=" + std::to_string(inst.stream_id());
  out += " noise=";
  out += to_string(inst.noise());
  out += " means=";
  for (std::size_t a = 0; a < inst.arms(); ++a) {
    if (a) out += ',';
    out += format_double(inst.mean(a));
  }
  return out;
}

BanditInstance parse_instance(std::string_view record) {
  std::map<std::string, std::string, std::less<>> fields;
  std::istringstream in{std::string(record)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("instance record: malformed token '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end())
      throw std::invalid_argument(std::string("instance record: missing '") + key + "'");
    return it->second;
  };

  std::vector<double> means;
  {
    std::string_view rest = need("means");
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      means.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  const auto K = static_cast<std::size_t>(parse_uint(need("K")));
  if (K != means.size())
    throw std::invalid_argument("instance record: K does not match the means");

  BanditInstance inst = BanditInstance::from_means(
      std::move(means), parse_double(need("r_max")),
      parse_noise_model(need("noise")));
  if (inst.delta_star() != parse_double(need("delta_star")))
    throw std::invalid_argument("instance record: delta_star inconsistent with means");
  inst.set_provenance(parse_uint(need("seed")), parse_uint(need("stream")));
  return inst;
}

void softmax_into(std::span<const double> theta, std::span<double> out) noexcept {
  double m = theta[0];
  for (double t : theta) m = std::max(m, t);
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out[i] = std::exp(theta[i] - m);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (double& p : out) p *= inv;
}

std::vector<double> softmax(std::span<const double> theta) {
  if (theta.empty()) throw std::invalid_argument("softmax: empty input");
  for (double t : theta)
    if (!std::isfinite(t)) throw std::invalid_argument("softmax: non-finite preference");
  std::vector<double> out(theta.size());
  softmax_into(theta, out);
  return out;
}

PolicyParams::PolicyParams(std::size_t K)
    : theta_(K, 0.0), probs_(K, K ? 1.0 / static_cast<double>(K) : 0.0) {
  if (K == 0) throw std::invalid_argument("PolicyParams: K must be positive");
}

PolicyParams::PolicyParams(std::vector<double> theta)
    : theta_(std::move(theta)), probs_(softmax(theta_)) {}

void PolicyParams::set_theta(std::span<const double> theta) {
  if (theta.size() != theta_.size())
    throw std::invalid_argument("PolicyParams::set_theta: dimension mismatch");
  probs_ = softmax(theta);
  std::copy(theta.begin(), theta.end(), theta_.begin());
}

void PolicyParams::center() noexcept {
  double sum = 0.0;
  for (double t : theta_) sum += t;
  const double mean = sum / static_cast<double>(theta_.size());
  for (double& t : theta_) t -= mean;
}

std::size_t sample_action(std::span<const double> probs, double u) noexcept {
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] > 0.0) last_positive = a;
    cumulative += probs[a];
    if (u < cumulative) return a;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

Pull sample_step(const BanditInstance& inst, const PolicyParams& pol,
                 RngStream& rng) {
  if (pol.arms() != inst.arms())
    throw std::invalid_argument("sample_step: policy/instance dimension mismatch");
  Pull pull;
  pull.action = sample_action(pol.probs(), rng.uniform());
  pull.reward = inst.means()[pull.action];
  if (inst.noise() == NoiseModel::Gaussian) pull.reward += rng.normal();
  return pull;
}

}  // namespace lbsgb
