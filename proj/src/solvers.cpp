#include "mmrl/solvers.hpp"

#include <chrono>
#include <cmath>

#include "mmrl/metrics.hpp"
#include "mmrl/rng.hpp"
#include "mmrl/simplex.hpp"

namespace mmrl {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "eram") return Algorithm::eram;
  if (name == "aram") return Algorithm::aram;
  if (name == "onehot") return Algorithm::onehot;
  if (name == "uniform") return Algorithm::uniform;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::eram:
      return "eram";
    case Algorithm::aram:
      return "aram";
    case Algorithm::onehot:
      return "onehot";
    case Algorithm::uniform:
      return "uniform";
  }
  return "?";
}

EvalMode parse_eval_mode(const std::string& name) {
  if (name == "exact") return EvalMode::exact;
  if (name == "sampled") return EvalMode::sampled;
  throw InvalidArgument("unknown evaluation mode '" + name + "'");
}

std::string to_string(EvalMode mode) { return mode == EvalMode::exact ? "exact" : "sampled"; }

void SolverConfig::validate(double gamma) const {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(tau_w > 0.0)) throw InvalidArgument("tau_w must be positive");
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (iters < 0) throw InvalidArgument("iters must be nonnegative");
  if (trace_every < 1) throw InvalidArgument("trace_every must be >= 1");
  const double a = alpha(gamma), b = beta();
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("alpha = 1 - eta tau / (1 - gamma) must lie in (0, 1)");
  if (!(b > 0.0 && b < 1.0)) throw InvalidArgument("beta = 1 / (lambda tau_w + 1) must lie in (0, 1)");
  if (eval_mode == EvalMode::sampled && sampling.samples_per_pair < 1)
    throw InvalidArgument("samples_per_pair must be >= 1");
}

Eigen::MatrixXd learner_step_log(const Eigen::MatrixXd& log_pi, const Eigen::MatrixXd& q, double alpha, double tau) {
  if (q.rows() != log_pi.rows() || q.cols() != log_pi.cols())
    throw InvalidArgument("Q table shape does not match policy");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!log_pi.allFinite()) throw DegeneratePolicy("learner_step needs a strictly positive policy");

  const double step = (1.0 - alpha) / tau;
  Eigen::MatrixXd out(log_pi.rows(), log_pi.cols());
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    const Eigen::VectorXd logits = alpha * log_pi.row(s).transpose() + step * q.row(s).transpose();
    out.row(s) = log_softmax(logits).transpose();
  }
  return out;
}

Policy learner_step(const Policy& policy, const Eigen::MatrixXd& q, double alpha, double tau) {
  if (!is_strictly_positive(policy)) throw DegeneratePolicy("learner_step needs a strictly positive policy");
  Policy out{learner_step_log(policy.probs.array().log().matrix(), q, alpha, tau).array().exp().matrix()};
  for (Eigen::Index s = 0; s < out.probs.rows(); ++s) out.probs.row(s) /= out.probs.row(s).sum();
  return out;
}

namespace {

void check_weight_step(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec, double beta, double tau_w) {
  if (!log_w.allFinite()) throw DegenerateWeight("weight update needs a strictly positive weight");
  if (value_vec.size() != log_w.size()) throw InvalidArgument("value vector size does not match weight");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in (0, 1]");
  if (!(tau_w > 0.0)) throw InvalidArgument("tau_w must be positive");
}

Eigen::VectorXd log_of(const Weight& w) {
  if (!is_strictly_positive(w)) throw DegenerateWeight("weight update needs a strictly positive weight");
  return w.w.array().log();
}

}  // namespace

Eigen::VectorXd adversary_step_eram_log(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec, double beta,
                                        double tau_w) {
  check_weight_step(log_w, value_vec, beta, tau_w);
  return log_softmax(Eigen::VectorXd(-(1.0 - beta) / tau_w * value_vec + beta * log_w));
}

Weight adversary_step_eram(const Weight& w, const Eigen::VectorXd& value_vec, double beta, double tau_w) {
  const Eigen::VectorXd log_w = log_of(w);
  check_weight_step(log_w, value_vec, beta, tau_w);
  return {softmax(Eigen::VectorXd(-(1.0 - beta) / tau_w * value_vec + beta * log_w))};
}

AramState compute_reference_vector(const MomdpInstance& m, const Eigen::MatrixXd& occupancy,
                                   const Eigen::VectorXd& value_vec) {
  const int K = m.num_objectives();
  if (value_vec.size() != K) throw InvalidArgument("value vector size does not match instance");
  if (occupancy.rows() != m.num_states() || occupancy.cols() != m.num_actions())
    throw InvalidArgument("occupancy shape does not match instance");
  AramState out;
  out.worst_index = argmin_lowest(value_vec);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(K);
  for (int i = 0; i < K; ++i)
    for (int s = 0; s < m.num_states(); ++s)
      for (int a = 0; a < m.num_actions(); ++a)
        moments(i) += occupancy(s, a) * m.reward(i, s, a) * m.reward(out.worst_index, s, a);
  out.log_c = log_softmax(moments);
  out.c = softmax(moments);
  return out;
}

namespace {

Eigen::VectorXd aram_logits(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec, const AramState& ref,
                            double beta, double tau_w) {
  check_weight_step(log_w, value_vec, beta, tau_w);
  if (ref.log_c.size() != log_w.size() || !ref.log_c.allFinite())
    throw DegenerateWeight("reference vector must be strictly positive");
  return -(1.0 - beta) / tau_w * value_vec + beta * log_w + (1.0 - beta) * ref.log_c;
}

}  // namespace

Eigen::VectorXd adversary_step_aram_log(const Eigen::VectorXd& log_w, const Eigen::VectorXd& value_vec,
                                        const AramState& ref, double beta, double tau_w) {
  return log_softmax(aram_logits(log_w, value_vec, ref, beta, tau_w));
}

Weight adversary_step_aram(const Weight& w, const Eigen::VectorXd& value_vec, const AramState& ref, double beta,
                           double tau_w) {
  return {softmax(aram_logits(log_of(w), value_vec, ref, beta, tau_w))};
}

Weight adversary_step_onehot(const Eigen::VectorXd& value_vec) {
  if (value_vec.size() == 0) throw InvalidArgument("empty value vector");
  return Weight::one_hot(static_cast<int>(value_vec.size()), argmin_lowest(value_vec));
}

TheoryStepsizes theory_stepsizes(const MomdpInstance& m, double tau, double epsilon, std::optional<double> tau_w) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  const double gamma = m.gamma();
  TheoryStepsizes out;
  out.epsilon_max = 48.0 * (1.0 - gamma) / 121.0;
  if (!(epsilon > 0.0 && epsilon < out.epsilon_max))
    throw EpsilonOutOfRange("epsilon must lie in (0, " + std::to_string(out.epsilon_max) + ")");
  const double K = m.num_objectives();
  const double spread = m.max_abs_reward() + tau * std::log(static_cast<double>(m.num_actions()));
  out.tau_w_lower_bound = 12.0 * K * spread * spread / (tau * std::pow(1.0 - gamma, 4));
  const double tw = tau_w.value_or(out.tau_w_lower_bound);
  if (!(tw > 0.0)) throw InvalidArgument("tau_w must be positive");
  out.eta = epsilon * (1.0 - gamma) / tau;
  out.lambda = epsilon * epsilon / (tw * (1.0 - epsilon * epsilon));
  out.rate_bound = 1.0 - epsilon * epsilon / 2.0;
  return out;
}

namespace {

Policy policy_from_log(const Eigen::MatrixXd& log_pi) {
  Policy out{log_pi.array().exp().matrix()};
  for (Eigen::Index s = 0; s < out.probs.rows(); ++s) out.probs.row(s) /= out.probs.row(s).sum();
  return out;
}

Weight weight_from_log(const Eigen::VectorXd& log_w) {
  Weight out{log_w.array().exp().matrix()};
  out.w /= out.w.sum();
  return out;
}

}  // namespace

RunResult run(const MomdpInstance& m, const SolverConfig& cfg, const Equilibrium* reference) {
  require_valid(m);
  cfg.validate(m.gamma());
  const int S = m.num_states(), A = m.num_actions(), K = m.num_objectives();
  const double alpha = cfg.alpha(m.gamma());
  const double beta = cfg.beta();

  const Policy init_pi = cfg.init_policy.value_or(Policy::uniform(S, A));
  const Weight init_w = cfg.init_weight.value_or(Weight::uniform(K));
  if (init_pi.num_states() != S || init_pi.num_actions() != A || !is_row_stochastic(init_pi))
    throw InvalidArgument("initial policy is not a valid policy for this instance");
  if (init_w.size() != K || !in_simplex(init_w.w)) throw InvalidArgument("initial weight is not in the simplex");

  Eigen::MatrixXd log_pi = init_pi.probs.array().log();
  Policy pi = init_pi;
  Weight w = init_w;
  // The one-hot adversary has no memory, so it starts at its best response.
  if (cfg.algorithm == Algorithm::onehot && !cfg.init_weight)
    w = adversary_step_onehot(eval_exact(m, pi, w, cfg.tau).v_init_vec);
  Eigen::VectorXd log_w = w.w.array().log();

  RunResult out;
  out.trace.num_objectives = K;
  const auto start = std::chrono::steady_clock::now();

  for (long iter = 0;; ++iter) {
    const bool record = iter % cfg.trace_every == 0 || iter == cfg.iters;
    const bool last = iter == cfg.iters;

    std::optional<EvalReport> exact;
    if (cfg.eval_mode == EvalMode::exact || record) exact = eval_exact(m, pi, w, cfg.tau);
    if (record) {
      TraceRow row;
      row.iter = iter;
      row.weight = w.w;
      row.values = exact->v_init_vec;
      row.min_value = exact->min_value();
      row.scalar_soft_value = exact->scalar_soft_value(w);
      if (!row.values.allFinite()) throw NonFiniteIterate(iter, std::move(out.trace));
      if (cfg.record_nash_gap) row.nash_gap = nash_gap(m, pi, w).nash_gap;
      if (reference) {
        const auto gaps = optimality_gaps(log_pi, log_w, *exact, *reference);
        row.log_policy_gap = gaps.log_policy_gap;
        row.w_gap = gaps.w_gap;
        row.q_gap = gaps.q_gap;
      }
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      out.trace.rows.push_back(std::move(row));
    }
    if (last) break;

    const EvalReport eval =
        cfg.eval_mode == EvalMode::exact
            ? std::move(*exact)
            : eval_sampled(m, pi, w, cfg.tau,
                           {cfg.sampling.samples_per_pair,
                            derive_seed(cfg.sampling.seed, static_cast<std::uint64_t>(iter))});
    if (!eval.q_scalar.allFinite() || !eval.v_init_vec.allFinite())
      throw NonFiniteIterate(iter, std::move(out.trace));

    Eigen::MatrixXd next_log_pi = learner_step_log(log_pi, eval.q_scalar, alpha, cfg.tau);
    Eigen::VectorXd next_log_w;
    switch (cfg.algorithm) {
      case Algorithm::eram:
        next_log_w = adversary_step_eram_log(log_w, eval.v_init_vec, beta, cfg.tau_w);
        break;
      case Algorithm::aram:
        next_log_w = adversary_step_aram_log(
            log_w, eval.v_init_vec, compute_reference_vector(m, eval.occupancy, eval.v_init_vec), beta, cfg.tau_w);
        break;
      case Algorithm::onehot:
        next_log_w = adversary_step_onehot(eval.v_init_vec).w.array().log();
        break;
      case Algorithm::uniform:
        next_log_w = log_w;
        break;
    }
    if (!next_log_pi.allFinite() || next_log_w.array().isNaN().any() || !(next_log_w.maxCoeff() < 1e-9))
      throw NonFiniteIterate(iter + 1, std::move(out.trace));
    log_pi = std::move(next_log_pi);
    log_w = std::move(next_log_w);
    pi = policy_from_log(log_pi);
    if (cfg.algorithm == Algorithm::onehot)
      w = adversary_step_onehot(eval.v_init_vec);
    else if (cfg.algorithm != Algorithm::uniform)
      w = weight_from_log(log_w);
  }
  out.policy = std::move(pi);
  out.weight = std::move(w);
  out.log_policy = std::move(log_pi);
  out.log_weight = std::move(log_w);
  return out;
}

}  // namespace mmrl
