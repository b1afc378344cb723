#include <doctest.h>

#include <cmath>

#include "mmrl/error.hpp"
#include "mmrl/policy_eval.hpp"
#include "mmrl/rng.hpp"
#include "mmrl/solvers.hpp"

using namespace mmrl;
using doctest::Approx;

namespace {

Weight random_weight(Rng& rng, int K) {
  Weight w{Eigen::VectorXd(K)};
  for (int k = 0; k < K; ++k) w.w(k) = 0.01 + rng.uniform();
  w.w /= w.w.sum();
  return w;
}

}  // namespace

TEST_CASE("learner step arithmetic") {
  const auto pi = Policy::uniform(1, 2);
  Eigen::MatrixXd q(1, 2);
  q << 1, 0;
  const auto next = learner_step(pi, q, 0.5, 1.0);
  CHECK(next(0, 0) == Approx(0.6224593312).epsilon(1e-10));
  CHECK(next(0, 1) == Approx(0.3775406688).epsilon(1e-10));
}

TEST_CASE("learner step identities") {
  Policy pi{Eigen::MatrixXd(2, 3)};
  pi.probs << 0.2, 0.3, 0.5, 0.6, 0.3, 0.1;
  Eigen::MatrixXd q(2, 3);
  q << 1, 5, -2, 0.3, 0.1, 7;
  CHECK((learner_step(pi, q, 1.0, 0.1).probs - pi.probs).cwiseAbs().maxCoeff() <= 1e-15);
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(2, 3, 4.2);
  const auto uni = Policy::uniform(2, 3);
  CHECK((learner_step(uni, flat, 0.3, 0.1).probs - uni.probs).cwiseAbs().maxCoeff() <= 1e-15);
  // with a flat Q the step only tempers the policy: pi^alpha, renormalized
  Eigen::MatrixXd tempered = pi.probs.array().pow(0.3);
  for (int s = 0; s < 2; ++s) tempered.row(s) /= tempered.row(s).sum();
  CHECK((learner_step(pi, flat, 0.3, 0.1).probs - tempered).cwiseAbs().maxCoeff() <= 1e-12);

  // the update direction is aligned with Q
  const auto next = learner_step(pi, q, 0.7, 0.5);
  for (int s = 0; s < 2; ++s) {
    Eigen::Index dir_arg, q_arg;
    (next.probs.row(s).array().log() - 0.7 * pi.probs.row(s).array().log()).maxCoeff(&dir_arg);
    q.row(s).maxCoeff(&q_arg);
    CHECK(dir_arg == q_arg);
    CHECK(std::abs(next.probs.row(s).sum() - 1) <= 1e-12);
    CHECK(next.probs.row(s).minCoeff() > 0);
  }
}

TEST_CASE("learner step rejects zero probabilities") {
  Policy pi{Eigen::MatrixXd(1, 2)};
  pi.probs << 1, 0;
  CHECK_THROWS_AS(learner_step(pi, Eigen::MatrixXd::Zero(1, 2), 0.5, 1.0), DegeneratePolicy);
}

TEST_CASE("eram adversary step arithmetic") {
  const auto w = Weight::uniform(2);
  CHECK(adversary_step_eram(w, Eigen::Vector2d(3, 3), 0.5, 1.0).w.isApprox(w.w, 1e-15));
  const auto next = adversary_step_eram(w, Eigen::Vector2d(1, 2), 0.5, 1.0);
  CHECK(next(0) == Approx(0.6224593312).epsilon(1e-10));
  CHECK(next(1) == Approx(0.3775406688).epsilon(1e-10));
  Weight zero{Eigen::Vector2d(1, 0)};
  CHECK_THROWS_AS(adversary_step_eram(zero, Eigen::Vector2d(1, 2), 0.5, 1.0), DegenerateWeight);
}

TEST_CASE("eram adversary step is shift invariant") {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto w = random_weight(rng, 4);
    Eigen::VectorXd v(4);
    for (int k = 0; k < 4; ++k) v(k) = rng.uniform(0, 400);
    const double c = rng.uniform(-100, 100);
    const auto a = adversary_step_eram(w, v, 0.9, 0.05);
    const auto b = adversary_step_eram(w, (v.array() + c).matrix(), 0.9, 0.05);
    CHECK((a.w - b.w).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("reference vector") {
  const auto m = one_state_symmetric();
  const auto eval = eval_exact(m, Policy::uniform(1, 2), Weight::uniform(2), 0.0);
  const auto ref = compute_reference_vector(m, eval.occupancy, Eigen::Vector2d(1, 1));
  CHECK(ref.worst_index == 0);
  CHECK(ref.c(0) == Approx(0.6224593312).epsilon(1e-10));
  CHECK(ref.c(1) == Approx(0.3775406688).epsilon(1e-10));

  MomdpInstance single(1, 2, 1, 0.5, {1.0}, {1, 1}, {3, 4});
  const auto one = compute_reference_vector(single, Eigen::MatrixXd::Constant(1, 2, 0.5), Eigen::VectorXd::Ones(1));
  CHECK(one.c(0) == 1.0);
  CHECK(one.worst_index == 0);

  MomdpInstance twin(1, 2, 2, 0.5, {1.0}, {1, 1}, {3, 4, 3, 4});
  const auto t = compute_reference_vector(twin, Eigen::MatrixXd::Constant(1, 2, 0.5), Eigen::Vector2d(2, 1));
  CHECK(t.worst_index == 1);
  CHECK(t.c(0) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("aram adversary step") {
  const auto w = Weight::uniform(2);
  AramState c;
  c.c = Eigen::Vector2d(1, 0);
  c.c(0) = 1.0 / (1.0 + std::exp(-0.5));
  c.c(1) = 1.0 - c.c(0);
  c.log_c = c.c.array().log();
  const auto next = adversary_step_aram(w, Eigen::Vector2d(1, 2), c, 0.5, 1.0);
  // 30-digit reference evaluation
  CHECK(next(0) == Approx(0.6791786991753930).epsilon(1e-12));
  CHECK(next(1) == Approx(0.3208213008246070).epsilon(1e-12));

  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto wt = random_weight(rng, 3);
    Eigen::VectorXd v(3);
    for (int k = 0; k < 3; ++k) v(k) = rng.uniform(0, 20);
    AramState uni;
    uni.c = Eigen::VectorXd::Constant(3, 1.0 / 3);
    uni.log_c = uni.c.array().log();
    const auto a = adversary_step_aram(wt, v, uni, 0.8, 0.3);
    const auto b = adversary_step_eram(wt, v, 0.8, 0.3);
    CHECK((a.w - b.w).cwiseAbs().maxCoeff() <= 1e-12);
    // beta -> 1 is the identity
    const auto still = adversary_step_aram(wt, v, uni, 1.0 - 1e-13, 0.3);
    CHECK((still.w - wt.w).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("one-hot adversary") {
  CHECK(adversary_step_onehot(Eigen::Vector3d(3, 1, 2)).w == Eigen::Vector3d(0, 1, 0));
  CHECK(adversary_step_onehot(Eigen::Vector3d(2, 2, 2)).w == Eigen::Vector3d(1, 0, 0));
  CHECK(adversary_step_onehot(Eigen::VectorXd::Constant(1, 5.0)).w == Eigen::VectorXd::Ones(1));
}

TEST_CASE("theory step sizes") {
  GeneratorConfig cfg;
  auto m = random_instance(cfg);
  // rescale one reward to exactly 20 so r_max = 20
  auto rewards = m.reward_data();
  rewards[0] = 20.0;
  m = MomdpInstance(2, 2, 2, 0.95, m.mu_data(), m.transition_data(), rewards);
  const auto t = theory_stepsizes(m, 0.05, 0.01);
  CHECK(t.eta == Approx(0.01).epsilon(1e-12));
  CHECK(t.tau_w_lower_bound == Approx(3.0826559653912e10).epsilon(1e-10));
  CHECK(t.epsilon_max == Approx(48 * 0.05 / 121).epsilon(1e-12));
  CHECK_THROWS_AS(theory_stepsizes(m, 0.05, 0.1), EpsilonOutOfRange);

  const MomdpInstance m7(2, 2, 2, 0.7, m.mu_data(), m.transition_data(), rewards);
  const auto l = theory_stepsizes(m7, 0.05, 0.1, 10.0);
  CHECK(l.lambda == Approx(1.0101010101e-3).epsilon(1e-9));
  CHECK(l.rate_bound == Approx(0.995).epsilon(1e-12));
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate(0.95));
  c.eta = 2.0;  // alpha < 0
  CHECK_THROWS_AS(c.validate(0.95), InvalidArgument);
  CHECK(parse_algorithm("aram") == Algorithm::aram);
  CHECK_THROWS_AS(parse_algorithm("ppo"), InvalidArgument);
  CHECK(parse_eval_mode(to_string(EvalMode::sampled)) == EvalMode::sampled);
}

TEST_CASE("symmetric fixture converges to the symmetric equilibrium") {
  const auto m = one_state_symmetric();
  SolverConfig c;
  c.tau = c.tau_w = 0.1;
  // theory step sizes at epsilon = 0.1 (lambda at tau_w itself)
  c.eta = 0.1 * (1 - m.gamma()) / c.tau;
  c.lambda = 0.01 / (c.tau_w * 0.99);
  c.iters = 5000;
  c.trace_every = 1000;
  const auto r = run(m, c);
  CHECK((r.policy.probs.array() - 0.5).abs().maxCoeff() <= 1e-6);
  CHECK((r.weight.w.array() - 0.5).abs().maxCoeff() <= 1e-6);
  CHECK(r.trace.rows.back().iter == 5000);
}

TEST_CASE("run records rows on the stride and at the end") {
  GeneratorConfig g;
  g.seed = 3;
  const auto m = random_instance(g);
  SolverConfig c;
  c.iters = 250;
  c.trace_every = 100;
  const auto r = run(m, c);
  REQUIRE(r.trace.rows.size() == 4);
  CHECK(r.trace.rows[0].iter == 0);
  CHECK(r.trace.rows[3].iter == 250);
  for (const auto& row : r.trace.rows) {
    CHECK(in_simplex(row.weight));
    CHECK(row.nash_gap.has_value());
    CHECK(row.min_value == Approx(row.values.minCoeff()));
  }
  CHECK(is_row_stochastic(r.policy));
  CHECK(is_strictly_positive(r.policy));
}

TEST_CASE("uniform baseline keeps the weight fixed; one-hot stays on vertices") {
  GeneratorConfig g;
  g.num_objectives = 3;
  g.seed = 5;
  const auto m = random_instance(g);
  SolverConfig c;
  c.iters = 500;
  c.trace_every = 10;
  c.algorithm = Algorithm::uniform;
  for (const auto& row : run(m, c).trace.rows) CHECK(row.weight == Eigen::VectorXd::Constant(3, 1.0 / 3));
  c.algorithm = Algorithm::onehot;
  for (const auto& row : run(m, c).trace.rows) {
    for (int k = 0; k < 3; ++k) CHECK((row.weight(k) == 0.0 || row.weight(k) == 1.0));
    CHECK(row.weight.sum() == 1.0);
  }
}

TEST_CASE("zero step sizes are fixed points") {
  GeneratorConfig g;
  g.seed = 9;
  const auto m = random_instance(g);
  SolverConfig c;
  c.eta = 1e-14;
  c.lambda = 1e-14;
  c.iters = 50;
  Policy p0{Eigen::MatrixXd(2, 2)};
  p0.probs << 0.3, 0.7, 0.9, 0.1;
  c.init_policy = p0;
  c.init_weight = Weight{Eigen::Vector2d(0.2, 0.8)};
  const auto r = run(m, c);
  CHECK((r.policy.probs - p0.probs).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((r.weight.w - Eigen::Vector2d(0.2, 0.8)).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("aram and sampled runs are deterministic") {
  GeneratorConfig g;
  g.num_objectives = 4;
  g.seed = 12;
  const auto m = random_instance(g);
  SolverConfig c;
  c.iters = 300;
  c.algorithm = Algorithm::aram;
  c.eval_mode = EvalMode::sampled;
  c.sampling = {32, 77};
  const auto a = run(m, c);
  const auto b = run(m, c);
  CHECK(a.log_policy == b.log_policy);
  CHECK(a.log_weight == b.log_weight);
  CHECK(in_simplex(a.weight.w));
}

namespace {

double tail_variation(const IterationTrace& trace) {
  const auto& rows = trace.rows;
  double tv = 0;
  for (std::size_t i = rows.size() - rows.size() / 10; i < rows.size(); ++i)
    tv += std::abs(rows[i].scalar_soft_value - rows[i - 1].scalar_soft_value);
  return tv;
}

}  // namespace

// ERAM settles into limit cycles on a few (2,2,2) instances at these settings,
// so the universal form of the stability property does not hold.
TEST_CASE("last-iterate stability on every seed" * doctest::may_fail()) {
  bool oscillating_baseline = false;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GeneratorConfig g;
    g.seed = seed;
    const auto m = random_instance(g);
    SolverConfig c;
    c.trace_every = 1;
    c.record_nash_gap = false;
    CAPTURE(seed);
    CHECK(tail_variation(run(m, c).trace) <= 1e-3);
    c.algorithm = Algorithm::onehot;
    oscillating_baseline = oscillating_baseline || tail_variation(run(m, c).trace) >= 1e-2;
  }
  CHECK(oscillating_baseline);
}
