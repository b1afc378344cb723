#include <doctest.h>

#include <cmath>

#include "mmrl/error.hpp"
#include "mmrl/oracle.hpp"
#include "mmrl/rng.hpp"
#include "mmrl/simplex.hpp"

using namespace mmrl;
using doctest::Approx;

namespace {

MomdpInstance instance(std::uint64_t seed, double gamma = 0.95) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.gamma = gamma;
  return random_instance(cfg);
}

}  // namespace

TEST_CASE("best response policy") {
  const auto m = one_state_symmetric();
  const auto uni = best_response_policy(m, Weight::uniform(2), 0.1);
  CHECK(uni.policy(0, 0) == Approx(0.5).epsilon(1e-12));
  const auto tilted = best_response_policy(m, Weight::one_hot(2, 0), 0.1);
  CHECK(tilted.policy(0, 0) == Approx(0.9999546021312976).epsilon(1e-12));
  // the symmetric fixture's action values differ by at most 1
  for (double w0 : {0.0, 0.3, 0.5, 0.8, 1.0}) {
    const auto flat = best_response_policy(m, Weight{Eigen::Vector2d(w0, 1 - w0)}, 1000.0);
    CHECK((flat.policy.probs.array() - 0.5).abs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("best response weight") {
  const auto m = one_state_symmetric();
  CHECK(best_response_weight(m, Policy::uniform(1, 2), 0.1, 0.1).w.isApprox(Eigen::Vector2d(0.5, 0.5), 1e-14));
  // one state, gamma 0, single action with rewards (1, 2): V_tau = (1, 2)
  MomdpInstance fixed(1, 1, 2, 0.0, {1.0}, {1.0}, {1.0, 2.0});
  const auto w = best_response_weight(fixed, Policy::uniform(1, 1), 0.3, 1.0);
  CHECK(w(0) == Approx(0.7310585786300049).epsilon(1e-12));
  Policy skew{Eigen::MatrixXd(1, 2)};
  skew.probs << 0.9, 0.1;
  const auto wide = best_response_weight(m, skew, 0.05, 1e6);
  CHECK((wide.w.array() - 0.5).abs().maxCoeff() <= 1e-6);
}

TEST_CASE("equilibrium of the symmetric fixture") {
  const auto eq = solve_equilibrium(one_state_symmetric(), 0.1, 0.1);
  CHECK(eq.converged);
  CHECK(eq.max_residual() <= 1e-8);
  CHECK((eq.policy_star.probs.array() - 0.5).abs().maxCoeff() <= 1e-8);
  CHECK((eq.weight_star.w.array() - 0.5).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("equilibria of random instances are certified") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = instance(seed);
    for (double tau_w : {0.05, 1e-3}) {
      auto eq = solve_equilibrium(m, 0.05, tau_w);
      CHECK(eq.converged);
      CHECK(eq.residual_policy <= 1e-8);
      CHECK(eq.residual_weight <= 1e-8);
      const double rp = eq.residual_policy, rw = eq.residual_weight;
      certify(m, eq);
      CHECK(eq.residual_policy == rp);
      CHECK(eq.residual_weight == rw);
    }
  }
}

TEST_CASE("saddle inequalities at the equilibrium") {
  Rng rng(8);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = instance(seed, 0.9);
    const double tau = 0.05, tau_w = 0.05;
    const auto eq = solve_equilibrium(m, tau, tau_w);
    REQUIRE(eq.converged);
    const auto at_star = eval_exact(m, eq.policy_star, eq.weight_star, tau);
    const double hw = entropy(eq.weight_star.w);
    const double learner_star = eq.weight_star.w.dot(at_star.v_soft_vec) - tau_w * hw;
    const double adversary_star = learner_star;
    for (int i = 0; i < 20; ++i) {
      Policy p{eq.policy_star.probs};
      for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) p.probs(s, a) *= std::exp(rng.uniform(-0.5, 0.5));
        p.probs.row(s) /= p.probs.row(s).sum();
      }
      const auto r = eval_exact(m, p, eq.weight_star, tau);
      CHECK(eq.weight_star.w.dot(r.v_soft_vec) - tau_w * hw <= learner_star + 1e-6);

      Eigen::VectorXd w = eq.weight_star.w;
      for (int k = 0; k < 2; ++k) w(k) *= std::exp(rng.uniform(-0.5, 0.5));
      w /= w.sum();
      CHECK(w.dot(at_star.v_soft_vec) - tau_w * entropy(w) >= adversary_star - 1e-6);
    }
  }
}

TEST_CASE("reformulation on fixtures") {
  const auto sym = minimize_reformulation(one_state_symmetric(), 0.1);
  CHECK(sym.converged);
  CHECK(sym.w_opt.w.isApprox(Eigen::Vector2d(0.5, 0.5), 1e-6));
  CHECK(sym.value_opt == Approx(1 + 0.2 * std::log(2.0)).epsilon(1e-9));

  MomdpInstance single(2, 2, 1, 0.9, {0.5, 0.5}, {0.3, 0.7, 0.5, 0.5, 1, 0, 0.2, 0.8}, {1, 2, 3, 4});
  const auto one = minimize_reformulation(single, 0.2);
  CHECK(one.w_opt(0) == 1.0);
  CHECK(one.value_opt == Approx(soft_value_iteration(single, Weight::uniform(1), 0.2).value(single)).epsilon(1e-9));
}

TEST_CASE("reformulation matches the equilibrium up to O(tau_w)") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = instance(seed);
    const auto ref = minimize_reformulation(m, 0.05);
    CHECK(ref.converged);
    for (double tau_w : {1e-3, 1e-4}) {
      const auto eq = solve_equilibrium(m, 0.05, tau_w);
      CHECK(std::abs(ref.value_opt - eq.value_star) <= 1e-4 + 10 * tau_w);
      // min-max >= max-min
      const auto r = eval_exact(m, eq.policy_star, eq.weight_star, 0.05);
      CHECK(ref.value_opt >= r.v_soft_vec.minCoeff() - 1e-9);
      CHECK(ref.value_opt - r.v_soft_vec.minCoeff() <= 1e-4 + 10 * tau_w);
    }
  }
}

TEST_CASE("eram cross-check agrees with the Newton oracle") {
  EquilibriumOptions opt;
  opt.cross_check_eram = true;
  const auto m = instance(4, 0.7);
  CHECK_NOTHROW(solve_equilibrium(m, 0.1, 1.0, opt));
}
