#include "lbsgb/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbsgb {

namespace {

void check_dims(const BanditInstance& inst, const PolicyParams& pol) {
  if (inst.arms() != pol.arms())
    throw std::invalid_argument("policy and instance have different arm counts");
}

std::vector<double> log_softmax(std::span<const double> theta) {
  const double m = *std::max_element(theta.begin(), theta.end());
  double total = 0.0;
  for (double t : theta) total += std::exp(t - m);
  const double lse = m + std::log(total);
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta[i] - lse;
  return out;
}

double positive_part(double x) noexcept { return x > 0.0 ? x : 0.0; }

}  // namespace

Barrier Barrier::of(double eta) {
  if (std::isnan(eta) || !(eta > 0.0))
    throw std::invalid_argument("barrier parameter eta must be > 0");
  Barrier b;
  if (std::isinf(eta)) return b;
  b.eta_ = eta;
  b.active_ = true;
  return b;
}

double euclidean_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double expected_reward(const BanditInstance& inst, std::span<const double> probs) {
  const auto r = inst.means();
  double m = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) m += probs[a] * r[a];
  return m;
}

GradientReport exact_gradient(const BanditInstance& inst, const PolicyParams& pol,
                              Barrier barrier) {
  check_dims(inst, pol);
  const std::size_t K = pol.arms();
  const auto pi = pol.probs();
  const auto r = inst.means();
  const double m = expected_reward(inst, pi);

  GradientReport rep;
  rep.grad_J.resize(K);
  rep.grad_B.assign(K, 0.0);
  rep.grad_Phi.resize(K);
  for (std::size_t a = 0; a < K; ++a) {
    rep.grad_J[a] = pi[a] * (r[a] - m);
    if (barrier.active())
      rep.grad_B[a] = barrier.inverse() * (1.0 - static_cast<double>(K) * pi[a]);
    rep.grad_Phi[a] = rep.grad_J[a] + rep.grad_B[a];
  }
  rep.norm_grad_Phi = euclidean_norm(rep.grad_Phi);
  return rep;
}

ObjectiveValue objective_value(const BanditInstance& inst, const PolicyParams& pol,
                               Barrier barrier) {
  check_dims(inst, pol);
  ObjectiveValue v;
  v.J = expected_reward(inst, pol.probs());
  if (barrier.active()) {
    double s = 0.0;
    for (double lp : log_softmax(pol.theta())) s += lp;
    v.barrier = barrier.inverse() * s;
  }
  v.Phi = v.J + v.barrier;
  return v;
}

void stochastic_gradient_into(std::span<const double> probs, Barrier barrier,
                              std::size_t action, double reward,
                              std::span<double> out) noexcept {
  const std::size_t K = probs.size();
  for (std::size_t a = 0; a < K; ++a) out[a] = -probs[a] * reward;
  out[action] = (1.0 - probs[action]) * reward;
  if (barrier.active()) {
    const double inv = barrier.inverse();
    const double k = static_cast<double>(K);
    for (std::size_t a = 0; a < K; ++a) out[a] += inv * (1.0 - k * probs[a]);
  }
}

StochasticGradient stochastic_gradient(const BanditInstance& inst,
                                       const PolicyParams& pol, Barrier barrier,
                                       std::size_t action, double reward) {
  check_dims(inst, pol);
  if (action >= pol.arms()) throw std::invalid_argument("action out of range");
  StochasticGradient g;
  g.ghat.resize(pol.arms());
  g.action = action;
  g.reward = reward;
  stochastic_gradient_into(pol.probs(), barrier, action, reward, g.ghat);
  return g;
}

Eigen::MatrixXd hessian(const BanditInstance& inst, const PolicyParams& pol,
                        Barrier barrier) {
  check_dims(inst, pol);
  const auto K = static_cast<Eigen::Index>(pol.arms());
  const auto pi = pol.probs();
  const auto r = inst.means();
  const double m = expected_reward(inst, pi);
  const double c = static_cast<double>(K) * barrier.inverse();

  Eigen::MatrixXd H(K, K);
  for (Eigen::Index i = 0; i < K; ++i) {
    for (Eigen::Index j = 0; j < K; ++j) {
      const double pij = pi[i] * pi[j];
      double h = -pij * (r[i] + r[j] - 2.0 * m);
      if (i == j) h += pi[i] * (r[i] - m);
      if (barrier.active()) h -= c * ((i == j ? pi[i] : 0.0) - pij);
      H(i, j) = h;
    }
  }
  return H;
}

Eigen::MatrixXd fim(const PolicyParams& pol) {
  const Eigen::Map<const Eigen::VectorXd> p(pol.probs().data(),
                                            static_cast<Eigen::Index>(pol.arms()));
  Eigen::MatrixXd F = -p * p.transpose();
  F.diagonal() += p;
  return F;
}

Eigen::MatrixXd reparam_fim(const PolicyParams& pol) {
  if (pol.arms() < 2) throw std::invalid_argument("reparam_fim needs K >= 2");
  const auto n = static_cast<Eigen::Index>(pol.arms() - 1);
  const Eigen::Map<const Eigen::VectorXd> p(pol.probs().data(), n);
  Eigen::MatrixXd F = -p * p.transpose();
  F.diagonal() += p;
  return F;
}

double reparam_fim_logdet(const PolicyParams& pol) {
  for (double p : pol.probs())
    if (!(p > 0.0))
      throw std::invalid_argument("reparam_fim_logdet: zero probability, determinant degenerate");
  const Eigen::LLT<Eigen::MatrixXd> llt(reparam_fim(pol));
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("reparam_fim_logdet: matrix not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

namespace {

double loj(const BanditInstance& inst, const PolicyParams& pol, Barrier barrier,
           double k_eff) {
  check_dims(inst, pol);
  const double m = expected_reward(inst, pol.probs());
  const double core = pol.prob(inst.opt_arm()) * (inst.best_mean() - m);
  return positive_part(core - k_eff * barrier.inverse());
}

}  // namespace

double lojasiewicz_lower_bound(const BanditInstance& inst, const PolicyParams& pol,
                               Barrier barrier) {
  return loj(inst, pol, barrier, static_cast<double>(pol.arms()));
}

double lojasiewicz_lower_bound_strict(const BanditInstance& inst,
                                      const PolicyParams& pol, Barrier barrier) {
  return loj(inst, pol, barrier, static_cast<double>(pol.arms()) - 1.0);
}

BoundCheck smoothness_bound(const BanditInstance& inst, const PolicyParams& pol,
                            Barrier barrier, std::span<const double> y) {
  if (y.size() != pol.arms()) throw std::invalid_argument("direction has wrong size");
  const Eigen::MatrixXd H = hessian(inst, pol, barrier);
  const Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
  const double K = static_cast<double>(pol.arms());
  const double g = exact_gradient(inst, pol, barrier).norm_grad_Phi;
  return {std::abs(v.dot(H * v)), 3.0 * (g + 5.0 * K * barrier.inverse()) * v.squaredNorm()};
}

BoundCheck sample_grad_norm_bound(const BanditInstance& inst,
                                  const PolicyParams& pol, Barrier barrier,
                                  std::size_t action) {
  const auto g = stochastic_gradient(inst, pol, barrier, action, inst.means()[action]);
  const double K = static_cast<double>(pol.arms());
  return {euclidean_norm(g.ghat),
          std::sqrt(2.0) * inst.r_max() * (1.0 - pol.prob(action)) +
              2.0 * K * barrier.inverse()};
}

BoundCheck self_bounding(const BanditInstance& inst, const PolicyParams& pol,
                         Barrier barrier) {
  check_dims(inst, pol);
  const std::size_t K = pol.arms();
  std::vector<double> g(K);
  double second_moment = 0.0;
  for (std::size_t a = 0; a < K; ++a) {
    stochastic_gradient_into(pol.probs(), barrier, a, inst.means()[a], g);
    double sq = 0.0;
    for (double x : g) sq += x * x;
    second_moment += pol.prob(a) * sq;
  }
  const double k = static_cast<double>(K);
  const double rm = inst.r_max();
  const double delta = inst.delta_min();
  const double C = 16.0 * rm * rm * rm * std::pow(k, 1.5) / (delta * delta);
  const double bias = 2.0 * k * barrier.inverse();
  const double norm = exact_gradient(inst, pol, barrier).norm_grad_Phi;
  return {second_moment, C * norm + bias * (4.0 * k * barrier.inverse() + C)};
}

BoundCheck grad_norm_upper(const BanditInstance& inst, const PolicyParams& pol,
                           Barrier barrier) {
  const double K = static_cast<double>(pol.arms());
  const double gap = inst.best_mean() - expected_reward(inst, pol.probs());
  return {exact_gradient(inst, pol, barrier).norm_grad_Phi,
          gap + 2.0 * K * barrier.inverse()};
}

BoundCheck grad_norm_upper_sqrt2(const BanditInstance& inst, const PolicyParams& pol,
                                 Barrier barrier) {
  const double K = static_cast<double>(pol.arms());
  const double gap = inst.best_mean() - expected_reward(inst, pol.probs());
  return {exact_gradient(inst, pol, barrier).norm_grad_Phi,
          std::sqrt(2.0) * gap + 2.0 * K * barrier.inverse()};
}

BoundCheck astar_lower_bound(const BanditInstance& inst, const PolicyParams& pol,
                             Barrier barrier) {
  check_dims(inst, pol);
  double lhs = 0.0;
  if (barrier.active()) {
    const double norm = exact_gradient(inst, pol, barrier).norm_grad_Phi;
    lhs = positive_part((1.0 - barrier.eta() * norm) / static_cast<double>(pol.arms()));
  }
  return {lhs, pol.prob(inst.opt_arm())};
}

BoundCheck barrier_difference(const BanditInstance& inst, const PolicyParams& before,
                              const PolicyParams& after, double alpha,
                              Barrier barrier) {
  check_dims(inst, before);
  check_dims(inst, after);
  const auto lb = log_softmax(before.theta());
  const auto la = log_softmax(after.theta());
  double diff = 0.0;
  for (std::size_t a = 0; a < lb.size(); ++a) diff += la[a] - lb[a];
  const double K = static_cast<double>(before.arms());
  return {diff, 2.0 * alpha * K *
                    (std::sqrt(2.0) * inst.r_max() + 2.0 * K * barrier.inverse())};
}

}  // namespace lbsgb
