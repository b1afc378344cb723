#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/types.hpp"

namespace mmrl {

/// Tabular multi-objective MDP <S, A, P, mu, r, gamma> with K-dimensional
/// rewards. Storage is dense and row-major: transition[(s*A + a)*S + s'] and
/// rewards[(k*S + s)*A + a].
class MomdpInstance {
 public:
  struct Meta {
    std::optional<std::uint64_t> seed;
    std::string generator;
    std::string mu_rule;
  };

  MomdpInstance() = default;
  MomdpInstance(int num_states, int num_actions, int num_objectives, double gamma,
                std::vector<double> mu, std::vector<double> transition,
                std::vector<double> rewards, Meta meta = {});

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int num_objectives() const { return num_objectives_; }
  double gamma() const { return gamma_; }

  double mu(int s) const { return mu_[s]; }
  double transition(int s, int a, int next) const {
    return transition_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + next];
  }
  double reward(int k, int s, int a) const {
    return rewards_[(static_cast<std::size_t>(k) * num_states_ + s) * num_actions_ + a];
  }

  /// <w, r(s, a)>
  double scalar_reward(const Weight& w, int s, int a) const;
  /// max over (k, s, a) of |r_k(s, a)|
  double max_abs_reward() const;

  const std::vector<double>& mu_data() const { return mu_; }
  const std::vector<double>& transition_data() const { return transition_; }
  const std::vector<double>& reward_data() const { return rewards_; }
  const Meta& meta() const { return meta_; }

  /// Copy of this instance with the transition kernel replaced.
  MomdpInstance with_transition(std::vector<double> transition) const;

  friend bool operator==(const MomdpInstance& a, const MomdpInstance& b) {
    return a.num_states_ == b.num_states_ && a.num_actions_ == b.num_actions_ &&
           a.num_objectives_ == b.num_objectives_ && a.gamma_ == b.gamma_ && a.mu_ == b.mu_ &&
           a.transition_ == b.transition_ && a.rewards_ == b.rewards_;
  }

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  int num_objectives_ = 0;
  double gamma_ = 0.0;
  std::vector<double> mu_;
  std::vector<double> transition_;
  std::vector<double> rewards_;
  Meta meta_;
};

/// One violated instance invariant. Indices that do not apply are -1.
struct Violation {
  enum class Kind { ShapeMismatch, NonStochasticRow, BadInitialDistribution, GammaOutOfRange, NonFiniteReward };
  Kind kind;
  int k = -1;
  int s = -1;
  int a = -1;

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty result means the instance is valid. gamma must lie in [0, 1).
std::vector<Violation> validate(const MomdpInstance& instance);

/// Throws InvalidArgument listing every violation.
void require_valid(const MomdpInstance& instance);

struct GeneratorConfig {
  int num_states = 2;
  int num_actions = 2;
  int num_objectives = 2;
  double reward_min = 1.0;
  double reward_max = 20.0;
  double gamma = 0.95;
  std::uint64_t seed = 0;
};

/// Random instance: each transition row is |S| uniforms normalized to one,
/// rewards are i.i.d. uniform on [reward_min, reward_max], mu is uniform.
MomdpInstance random_instance(const GeneratorConfig& config);

/// S={s0}, A={a0,a1}, r(a0)=(1,0), r(a1)=(0,1), gamma=0.5. The max-min
/// optimum is the uniform policy with value 1.
MomdpInstance one_state_symmetric();

/// S={s0}, A={a0,a1}, r(a0)=(2,0), r(a1)=(0,1), gamma=0. The unregularized
/// max-min value is 2/3, attained at pi(a0)=1/3.
MomdpInstance one_state_asymmetric();

}  // namespace mmrl
