#include "mmrl/types.hpp"

#include <cmath>

namespace mmrl {

Policy Policy::deterministic(const Eigen::VectorXi& actions, int num_actions) {
  Policy out{Eigen::MatrixXd::Zero(actions.size(), num_actions)};
  for (Eigen::Index s = 0; s < actions.size(); ++s) out.probs(s, actions(s)) = 1.0;
  return out;
}

bool in_simplex(const Eigen::Ref<const Eigen::VectorXd>& v, double tol) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || v(i) < 0.0) return false;
  }
  return std::abs(v.sum() - 1.0) <= tol;
}

bool is_row_stochastic(const Policy& policy, double tol) {
  for (int s = 0; s < policy.num_states(); ++s) {
    if (!in_simplex(policy.probs.row(s).transpose(), tol)) return false;
  }
  return policy.num_states() > 0;
}

bool is_strictly_positive(const Policy& policy) { return (policy.probs.array() > 0.0).all(); }

bool is_strictly_positive(const Weight& weight) { return (weight.w.array() > 0.0).all(); }

}  // namespace mmrl
