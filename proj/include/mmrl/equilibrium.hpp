#pragma once

#include <algorithm>
#include <string>

#include "mmrl/types.hpp"

namespace mmrl {

/// A certified (up to `residual_*`) saddle point of the regularized game.
struct Equilibrium {
  Policy policy_star;
  Eigen::MatrixXd log_policy_star;
  Weight weight_star;
  /// log w*; finite even where w* underflows to 0 at tiny tau_w.
  Eigen::VectorXd log_weight_star;
  double value_star = 0.0;  ///< <w*, V_tau^{pi*}>
  Eigen::MatrixXd q_star;   ///< Q^{pi*}_{w*, tau}
  /// || log pi* - log BR_pi(w*) ||_inf
  double residual_policy = 0.0;
  /// || w* - BR_w(pi*) ||_inf
  double residual_weight = 0.0;
  double tau = 0.0;
  double tau_w = 0.0;
  bool converged = false;
  std::string method;
  long iterations = 0;

  double max_residual() const { return std::max(residual_policy, residual_weight); }
};

}  // namespace mmrl
