#include "lbsgb/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lbsgb {

namespace {

constexpr std::array kAllBounds = {
    BoundId::Smoothness,     BoundId::Lojasiewicz,   BoundId::LojasiewiczStrict,
    BoundId::SelfBounding,   BoundId::SampleGradNorm, BoundId::GradNormUpper,
    BoundId::GradNormUpperSqrt2, BoundId::AstarLower, BoundId::FimLogdet,
    BoundId::Unbiasedness,
};

template <std::size_t N, typename T>
T pick(RngStream& rng, const std::array<T, N>& options) {
  return options[rng.below(N)];
}

std::vector<double> random_means(RngStream& rng, std::size_t K, double r_max) {
  std::vector<double> r(K);
  for (;;) {
    for (double& x : r) x = rng.uniform(-r_max, r_max);
    std::vector<double> s = r;
    std::sort(s.begin(), s.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < K; ++i) gap = std::min(gap, s[i] - s[i - 1]);
    if (gap >= 1e-3 * r_max) return r;
  }
}

double tolerance(BoundId id, double rhs) {
  switch (id) {
    case BoundId::FimLogdet:
      return kFimLogdetTol;
    case BoundId::Unbiasedness:
      return kUnbiasedTol;
    default:
      return kBoundRelTol * std::max(1.0, std::abs(rhs));
  }
}

}  // namespace

std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::Smoothness:
      return "smoothness";
    case BoundId::Lojasiewicz:
      return "lojasiewicz";
    case BoundId::LojasiewiczStrict:
      return "lojasiewicz_strict";
    case BoundId::SelfBounding:
      return "self_bounding";
    case BoundId::SampleGradNorm:
      return "sample_grad_norm";
    case BoundId::GradNormUpper:
      return "grad_norm_upper";
    case BoundId::GradNormUpperSqrt2:
      return "grad_norm_upper_sqrt2";
    case BoundId::AstarLower:
      return "astar_lower";
    case BoundId::FimLogdet:
      return "fim_logdet";
    case BoundId::Unbiasedness:
      return "unbiasedness";
  }
  return "?";
}

BoundId parse_bound(std::string_view text) {
  for (BoundId id : kAllBounds)
    if (to_string(id) == text) return id;
  throw std::invalid_argument("unknown bound id '" + std::string(text) + "'");
}

std::span<const BoundId> all_bounds() noexcept { return kAllBounds; }

SweepState random_sweep_state(RngStream& rng) {
  const std::size_t K = pick(rng, std::array<std::size_t, 5>{2, 3, 5, 10, 50});
  const double r_max = pick(rng, std::array<double, 3>{0.5, 1.0, 3.0});
  const double eta = pick(rng, std::array<double, 4>{10.0, 1e2, 1e3, 1e4});
  std::vector<double> theta(K);
  for (double& t : theta) t = rng.uniform(-8.0, 8.0);
  auto inst = BanditInstance::from_means(random_means(rng, K, r_max), r_max,
                                         NoiseModel::Deterministic);
  std::vector<double> y(K);
  for (double& v : y) v = rng.normal();
  const auto action = static_cast<std::size_t>(rng.below(K));
  return SweepState{std::move(inst), PolicyParams(std::move(theta)), Barrier::of(eta),
                    std::move(y), action};
}

PolicyParams random_fim_policy(RngStream& rng) {
  const std::size_t K = 2 + static_cast<std::size_t>(rng.below(7));
  std::vector<double> theta(K);
  for (;;) {
    for (double& t : theta) t = rng.uniform(-3.0, 3.0);
    PolicyParams pol(theta);
    const auto p = pol.probs();
    if (*std::min_element(p.begin(), p.end()) >= 1e-4) return pol;
  }
}

namespace {

BoundCheck unbiasedness_point(RngStream& rng) {
  const SweepState s = random_sweep_state(rng);
  const std::size_t K = s.pol.arms();
  std::vector<double> expectation(K, 0.0), g(K);
  for (std::size_t a = 0; a < K; ++a) {
    stochastic_gradient_into(s.pol.probs(), s.barrier, a, s.inst.means()[a], g);
    for (std::size_t i = 0; i < K; ++i) expectation[i] += s.pol.prob(a) * g[i];
  }
  const auto exact = exact_gradient(s.inst, s.pol, s.barrier);
  double worst = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    worst = std::max(worst, std::abs(expectation[i] - exact.grad_Phi[i]));
  return {worst, 0.0};
}

BoundCheck fim_point(RngStream& rng) {
  const PolicyParams pol = random_fim_policy(rng);
  double log_sum = 0.0;
  for (double p : pol.probs()) log_sum += std::log(p);
  return {std::abs(reparam_fim_logdet(pol) - log_sum), 0.0};
}

}  // namespace

BoundCheck evaluate_bound(BoundId id, RngStream& rng) {
  if (id == BoundId::FimLogdet) return fim_point(rng);
  if (id == BoundId::Unbiasedness) return unbiasedness_point(rng);

  const SweepState s = random_sweep_state(rng);
  switch (id) {
    case BoundId::Smoothness:
      return smoothness_bound(s.inst, s.pol, s.barrier, s.y);
    case BoundId::Lojasiewicz:
      return {lojasiewicz_lower_bound(s.inst, s.pol, s.barrier),
              exact_gradient(s.inst, s.pol, s.barrier).norm_grad_Phi};
    case BoundId::LojasiewiczStrict:
      return {lojasiewicz_lower_bound_strict(s.inst, s.pol, s.barrier),
              exact_gradient(s.inst, s.pol, s.barrier).norm_grad_Phi};
    case BoundId::SelfBounding:
      return self_bounding(s.inst, s.pol, s.barrier);
    case BoundId::SampleGradNorm:
      return sample_grad_norm_bound(s.inst, s.pol, s.barrier, s.action);
    case BoundId::GradNormUpper:
      return grad_norm_upper(s.inst, s.pol, s.barrier);
    case BoundId::GradNormUpperSqrt2:
      return grad_norm_upper_sqrt2(s.inst, s.pol, s.barrier);
    case BoundId::AstarLower:
      return astar_lower_bound(s.inst, s.pol, s.barrier);
    default:
      break;
  }
  throw std::invalid_argument("evaluate_bound: unhandled bound id");
}

namespace {

BoundSweepReport reduce(BoundId id, const std::vector<BoundCheck>& points) {
  BoundSweepReport rep;
  rep.n_points = points.size();
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (const BoundCheck& c : points) {
    const double slack = c.slack();
    rep.worst_slack = std::min(rep.worst_slack, slack);
    if (!(slack >= -tolerance(id, c.rhs))) ++rep.n_violations;
  }
  return rep;
}

void require_points(std::size_t n) {
  if (n < 1) throw std::invalid_argument("a sweep needs at least one point");
}

}  // namespace

BoundSweepReport sweep_bound_serial(BoundId id, std::size_t n, const RngStream& seed) {
  require_points(n);
  std::vector<BoundCheck> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = seed.substream(i);
    points[i] = evaluate_bound(id, rng);
  }
  return reduce(id, points);
}

BoundSweepReport sweep_bound(BoundId id, std::size_t n, const RngStream& seed) {
  require_points(n);
  std::vector<BoundCheck> points(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    RngStream rng = seed.substream(static_cast<std::uint64_t>(i));
    points[static_cast<std::size_t>(i)] = evaluate_bound(id, rng);
  }
  return reduce(id, points);
}

BoundSweepReport check_fim_identity(std::size_t n, const RngStream& seed) {
  return sweep_bound(BoundId::FimLogdet, n, seed);
}

BoundSweepReport check_unbiasedness(std::size_t n, const RngStream& seed) {
  return sweep_bound(BoundId::Unbiasedness, n, seed);
}

double RecurrenceParams::rho_bar() const { return std::sqrt(2.0 * b / (eta * a)); }

void RecurrenceParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(eta > 0.0) || !(alpha > 0.0) || !(r0 >= 0.0))
    throw std::invalid_argument("recurrence parameters need a, b, eta, alpha > 0 and r0 >= 0");
  if (!std::isfinite(rho_bar()))
    throw std::invalid_argument("recurrence fixed point is not finite");
}

std::vector<double> recurrence_rho(const RecurrenceParams& p, std::size_t T) {
  p.validate();
  const double limit = 1.0 / (p.a * std::max(p.r0, p.rho_bar()));
  if (p.alpha > limit)
    throw std::invalid_argument("recurrence_rho: alpha must be <= " + std::to_string(limit));
  std::vector<double> rho(T + 1);
  rho[0] = p.r0;
  for (std::size_t t = 0; t < T; ++t)
    rho[t + 1] = rho[t] - p.alpha * (p.a / 2.0) * rho[t] * rho[t] + p.alpha * p.b / p.eta;
  return rho;
}

std::vector<double> recurrence_nu(const RecurrenceParams& p, std::size_t T) {
  p.validate();
  const double rb = p.rho_bar();
  if (p.r0 < rb) throw std::invalid_argument("recurrence_nu: requires r0 >= rho_bar");
  const double limit = 1.0 / (p.a * p.r0);
  if (p.alpha > limit)
    throw std::invalid_argument("recurrence_nu: alpha must be <= " + std::to_string(limit));
  const double q = 1.0 - p.alpha * p.a * rb / 2.0;
  std::vector<double> nu(T + 1);
  nu[0] = p.r0;
  for (std::size_t t = 0; t < T; ++t) nu[t + 1] = q * nu[t] + p.alpha * p.b / p.eta;
  return nu;
}

double nu_closed_form_bound(const RecurrenceParams& p, std::size_t t) {
  p.validate();
  const double limit = std::sqrt(p.eta / (2.0 * p.a * p.b));
  if (p.alpha > limit)
    throw std::invalid_argument("nu_closed_form_bound: alpha must be <= " + std::to_string(limit));
  const double q = 1.0 - 0.5 * std::sqrt(2.0 * p.alpha * p.alpha * p.a * p.b / p.eta);
  return std::pow(q, static_cast<double>(t)) * p.r0 + p.rho_bar();
}

double relative_error(double x, double y) noexcept {
  return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

std::vector<double> fd_gradient(const BanditInstance& inst, std::span<const double> theta,
                                Barrier barrier, double h) {
  std::vector<double> th(theta.begin(), theta.end()), g(theta.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double orig = th[i];
    th[i] = orig + h;
    const double up = objective_value(inst, PolicyParams(th), barrier).Phi;
    th[i] = orig - h;
    const double down = objective_value(inst, PolicyParams(th), barrier).Phi;
    th[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const BanditInstance& inst, std::span<const double> theta,
                           Barrier barrier, double h) {
  const auto K = static_cast<Eigen::Index>(theta.size());
  std::vector<double> th(theta.begin(), theta.end());
  Eigen::MatrixXd H(K, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    const double orig = th[j];
    th[j] = orig + h;
    const auto up = exact_gradient(inst, PolicyParams(th), barrier).grad_Phi;
    th[j] = orig - h;
    const auto down = exact_gradient(inst, PolicyParams(th), barrier).grad_Phi;
    th[j] = orig;
    for (Eigen::Index i = 0; i < K; ++i) H(i, j) = (up[i] - down[i]) / (2.0 * h);
  }
  return H;
}

FdState random_fd_state(RngStream& rng, std::span<const double> etas) {
  if (etas.empty()) throw std::invalid_argument("random_fd_state: no eta values");
  const std::size_t K = pick(rng, std::array<std::size_t, 4>{2, 3, 5, 10});
  const double r_max = pick(rng, std::array<double, 3>{0.5, 1.0, 3.0});
  const double eta = etas[rng.below(etas.size())];
  std::vector<double> theta(K);
  for (double& t : theta) t = rng.uniform(-5.0, 5.0);
  return FdState{BanditInstance::from_means(random_means(rng, K, r_max), r_max,
                                            NoiseModel::Deterministic),
                 std::move(theta), Barrier::of(eta)};
}

FdReport check_gradient_fd(std::size_t n, const RngStream& seed,
                           std::span<const double> etas, double tol) {
  FdReport rep;
  rep.n_points = n;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = seed.substream(i);
    const FdState s = random_fd_state(rng, etas);
    const auto analytic = exact_gradient(s.inst, PolicyParams(s.theta), s.barrier).grad_Phi;
    const auto numeric = fd_gradient(s.inst, s.theta, s.barrier);
    double worst = 0.0;
    for (std::size_t a = 0; a < analytic.size(); ++a)
      worst = std::max(worst, relative_error(analytic[a], numeric[a]));
    rep.max_rel_error = std::max(rep.max_rel_error, worst);
    if (!(worst <= tol)) ++rep.n_violations;
  }
  return rep;
}

FdReport check_hessian_fd(std::size_t n, const RngStream& seed,
                          std::span<const double> etas, double tol) {
  FdReport rep;
  rep.n_points = n;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng = seed.substream(i);
    const FdState s = random_fd_state(rng, etas);
    const Eigen::MatrixXd analytic = hessian(s.inst, PolicyParams(s.theta), s.barrier);
    const Eigen::MatrixXd numeric = fd_hessian(s.inst, s.theta, s.barrier);
    double worst = 0.0;
    for (Eigen::Index r = 0; r < analytic.rows(); ++r)
      for (Eigen::Index c = 0; c < analytic.cols(); ++c)
        worst = std::max(worst, relative_error(analytic(r, c), numeric(r, c)));
    rep.max_rel_error = std::max(rep.max_rel_error, worst);
    if (!(worst <= tol)) ++rep.n_violations;
  }
  return rep;
}

}  // namespace lbsgb
