#pragma once

#include <Eigen/Dense>

namespace mmrl {

/// Row-stochastic |S| x |A| table of action probabilities.
struct Policy {
  Eigen::MatrixXd probs;

  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_actions() const { return static_cast<int>(probs.cols()); }
  double operator()(int s, int a) const { return probs(s, a); }

  static Policy uniform(int num_states, int num_actions) {
    return {Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions)};
  }
  /// Deterministic policy playing `actions[s]` in state s.
  static Policy deterministic(const Eigen::VectorXi& actions, int num_actions);
};

/// Scalarization weight: a point of the (K-1)-simplex.
struct Weight {
  Eigen::VectorXd w;

  int size() const { return static_cast<int>(w.size()); }
  double operator()(int k) const { return w(k); }

  static Weight uniform(int num_objectives) {
    return {Eigen::VectorXd::Constant(num_objectives, 1.0 / num_objectives)};
  }
  static Weight one_hot(int num_objectives, int index) {
    Weight out{Eigen::VectorXd::Zero(num_objectives)};
    out.w(index) = 1.0;
    return out;
  }
};

/// True iff every entry is >= 0 and the entries sum to 1 within `tol`.
bool in_simplex(const Eigen::Ref<const Eigen::VectorXd>& v, double tol = 1e-9);
bool is_row_stochastic(const Policy& policy, double tol = 1e-9);
bool is_strictly_positive(const Policy& policy);
bool is_strictly_positive(const Weight& weight);

}  // namespace mmrl
