#include "mmrl/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmrl/error.hpp"
#include "mmrl/rng.hpp"

namespace mmrl {

MomdpInstance::MomdpInstance(int num_states, int num_actions, int num_objectives, double gamma,
                             std::vector<double> mu, std::vector<double> transition,
                             std::vector<double> rewards, Meta meta)
    : num_states_(num_states),
      num_actions_(num_actions),
      num_objectives_(num_objectives),
      gamma_(gamma),
      mu_(std::move(mu)),
      transition_(std::move(transition)),
      rewards_(std::move(rewards)),
      meta_(std::move(meta)) {}

double MomdpInstance::scalar_reward(const Weight& w, int s, int a) const {
  double sum = 0.0;
  for (int k = 0; k < num_objectives_; ++k) sum += w(k) * reward(k, s, a);
  return sum;
}

double MomdpInstance::max_abs_reward() const {
  double out = 0.0;
  for (double r : rewards_) out = std::max(out, std::abs(r));
  return out;
}

MomdpInstance MomdpInstance::with_transition(std::vector<double> transition) const {
  MomdpInstance copy = *this;
  copy.transition_ = std::move(transition);
  return copy;
}

std::string Violation::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::ShapeMismatch:
      out << "ShapeMismatch";
      break;
    case Kind::NonStochasticRow:
      out << "NonStochasticRow(" << s << "," << a << ")";
      break;
    case Kind::BadInitialDistribution:
      out << "BadInitialDistribution";
      break;
    case Kind::GammaOutOfRange:
      out << "GammaOutOfRange";
      break;
    case Kind::NonFiniteReward:
      out << "NonFiniteReward(" << k << "," << s << "," << a << ")";
      break;
  }
  return out.str();
}

std::vector<Violation> validate(const MomdpInstance& m) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  const int S = m.num_states(), A = m.num_actions(), K = m.num_objectives();
  if (S <= 0 || A <= 0 || K <= 0 || m.mu_data().size() != static_cast<std::size_t>(S) ||
      m.transition_data().size() != static_cast<std::size_t>(S) * A * S ||
      m.reward_data().size() != static_cast<std::size_t>(K) * S * A) {
    out.push_back({Kind::ShapeMismatch});
    return out;
  }
  if (!(m.gamma() >= 0.0 && m.gamma() < 1.0)) out.push_back({Kind::GammaOutOfRange});

  double mu_sum = 0.0;
  bool mu_ok = true;
  for (double p : m.mu_data()) {
    if (!std::isfinite(p) || p < 0.0) mu_ok = false;
    mu_sum += p;
  }
  if (!mu_ok || std::abs(mu_sum - 1.0) > 1e-9) out.push_back({Kind::BadInitialDistribution});

  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double row = 0.0;
      bool ok = true;
      for (int t = 0; t < S; ++t) {
        const double p = m.transition(s, a, t);
        if (!std::isfinite(p) || p < 0.0) ok = false;
        row += p;
      }
      if (!ok || std::abs(row - 1.0) > 1e-9) out.push_back({Kind::NonStochasticRow, -1, s, a});
    }
  }
  for (int k = 0; k < K; ++k)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        if (!std::isfinite(m.reward(k, s, a))) out.push_back({Kind::NonFiniteReward, k, s, a});
  return out;
}

void require_valid(const MomdpInstance& instance) {
  const auto violations = validate(instance);
  if (violations.empty()) return;
  std::string msg = "invalid instance:";
  for (const auto& v : violations) msg += " " + v.describe();
  throw InvalidArgument(msg);
}

MomdpInstance random_instance(const GeneratorConfig& c) {
  if (c.num_states <= 0 || c.num_actions <= 0 || c.num_objectives <= 0)
    throw InvalidArgument("generator sizes must be positive");
  if (!(c.reward_min < c.reward_max)) throw InvalidArgument("reward range is empty");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");

  const int S = c.num_states, A = c.num_actions, K = c.num_objectives;
  Rng rng(c.seed);
  std::vector<double> transition(static_cast<std::size_t>(S) * A * S);
  for (std::size_t row = 0; row < static_cast<std::size_t>(S) * A; ++row) {
    double total = 0.0;
    for (int t = 0; t < S; ++t) {
      // Strictly positive draws keep every row normalizable.
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      transition[row * S + t] = u;
      total += u;
    }
    for (int t = 0; t < S; ++t) transition[row * S + t] /= total;
  }
  std::vector<double> rewards(static_cast<std::size_t>(K) * S * A);
  for (double& r : rewards) r = rng.uniform(c.reward_min, c.reward_max);

  MomdpInstance::Meta meta{c.seed, Rng::kName, "uniform"};
  return MomdpInstance(S, A, K, c.gamma, std::vector<double>(S, 1.0 / S), std::move(transition),
                       std::move(rewards), std::move(meta));
}

MomdpInstance one_state_symmetric() {
  return MomdpInstance(1, 2, 2, 0.5, {1.0}, {1.0, 1.0}, {1.0, 0.0, 0.0, 1.0},
                       {std::nullopt, "one_state_symmetric", "point"});
}

MomdpInstance one_state_asymmetric() {
  return MomdpInstance(1, 2, 2, 0.0, {1.0}, {1.0, 1.0}, {2.0, 0.0, 0.0, 1.0},
                       {std::nullopt, "one_state_asymmetric", "point"});
}

}  // namespace mmrl
