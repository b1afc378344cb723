#pragma once

// Precision-generic evaluation kernels. The public API instantiates them with
// double; the equilibrium oracle uses long double.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "mmrl/error.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/simplex.hpp"

namespace mmrl::detail {

template <class Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <class Real>
Mat<Real> policy_kernel(const MomdpInstance& m, const Mat<Real>& pi) {
  const int S = m.num_states(), A = m.num_actions();
  Mat<Real> out = Mat<Real>::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const Real p = pi(s, a);
      if (p == Real(0)) continue;
      for (int t = 0; t < S; ++t) out(s, t) += p * Real(m.transition(s, a, t));
    }
  return out;
}

template <class Real>
Real scaled_residual(const Mat<Real>& lhs, const Mat<Real>& x, const Mat<Real>& rhs) {
  const Real scale = std::max<Real>(Real(1), rhs.cwiseAbs().maxCoeff());
  return (lhs * x - rhs).cwiseAbs().maxCoeff() / scale;
}

/// Dense LU with partial pivoting; one refinement sweep when the scaled
/// residual exceeds 1e-10, SingularSystem when it stays above 1e-6.
template <class Real>
Mat<Real> solve_dense(const Mat<Real>& lhs, const Mat<Real>& rhs) {
  Eigen::PartialPivLU<Mat<Real>> lu(lhs);
  Mat<Real> x = lu.solve(rhs);
  Real res = scaled_residual(lhs, x, rhs);
  if (!(res <= Real(1e-10))) {
    x += lu.solve(Mat<Real>(rhs - lhs * x));
    res = scaled_residual(lhs, x, rhs);
  }
  if (!(res <= Real(1e-6))) throw SingularSystem(static_cast<double>(res));
  return x;
}

template <class Real>
struct Evaluation {
  Mat<Real> v_vec;           // K x S
  Vec<Real> v_init;          // K, mu-weighted
  Vec<Real> entropy_state;   // S, discounted entropy from each state
  Real entropy = 0;          // mu-weighted
  Vec<Real> soft_state;      // S, V_{w,tau}(s)
  Mat<Real> q_scalar;        // S x A, Q_{w,tau}(s, a)
  Vec<Real> state_occupancy; // S, normalized
  Mat<Real> occupancy;       // S x A, normalized
};

/// Exact evaluation of `pi` through (I - gamma P_pi) v = c_pi.
template <class Real>
Evaluation<Real> evaluate(const MomdpInstance& m, const Mat<Real>& pi, const Vec<Real>& w, Real tau) {
  const int S = m.num_states(), A = m.num_actions(), K = m.num_objectives();
  const Real gamma = m.gamma();
  const Mat<Real> kernel = policy_kernel<Real>(m, pi);
  const Mat<Real> lhs = Mat<Real>::Identity(S, S) - gamma * kernel;

  Mat<Real> rhs(S, K + 1);
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k) {
      Real r = 0;
      for (int a = 0; a < A; ++a) r += pi(s, a) * Real(m.reward(k, s, a));
      rhs(s, k) = r;
    }
    rhs(s, K) = entropy(pi.row(s));
  }
  const Mat<Real> sol = solve_dense<Real>(lhs, rhs);

  Evaluation<Real> out;
  Vec<Real> mu(S);
  for (int s = 0; s < S; ++s) mu(s) = Real(m.mu(s));
  out.v_vec = sol.leftCols(K).transpose();
  out.v_init = out.v_vec * mu;
  out.entropy_state = sol.col(K);
  out.entropy = out.entropy_state.dot(mu);
  out.soft_state = out.v_vec.transpose() * w + tau * out.entropy_state;

  out.q_scalar.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      Real q = 0, cont = 0;
      for (int k = 0; k < K; ++k) q += w(k) * Real(m.reward(k, s, a));
      for (int t = 0; t < S; ++t) cont += Real(m.transition(s, a, t)) * out.soft_state(t);
      out.q_scalar(s, a) = q + gamma * cont;
    }

  const Mat<Real> flow_lhs = Mat<Real>::Identity(S, S) - gamma * kernel.transpose();
  const Mat<Real> flow_rhs = (Real(1) - gamma) * mu;
  out.state_occupancy = solve_dense<Real>(flow_lhs, flow_rhs).col(0);
  out.occupancy.resize(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) out.occupancy(s, a) = pi(s, a) * out.state_occupancy(s);
  return out;
}

template <class Real>
Vec<Real> scalar_reward_row(const MomdpInstance& m, const Vec<Real>& w, int s) {
  Vec<Real> r = Vec<Real>::Zero(m.num_actions());
  for (int a = 0; a < m.num_actions(); ++a)
    for (int k = 0; k < m.num_objectives(); ++k) r(a) += w(k) * Real(m.reward(k, s, a));
  return r;
}

template <class Real>
Vec<Real> backup_row(const MomdpInstance& m, const Vec<Real>& w, const Vec<Real>& v, int s) {
  Vec<Real> q = scalar_reward_row<Real>(m, w, s);
  for (int a = 0; a < m.num_actions(); ++a) {
    Real cont = 0;
    for (int t = 0; t < m.num_states(); ++t) cont += Real(m.transition(s, a, t)) * v(t);
    q(a) += Real(m.gamma()) * cont;
  }
  return q;
}

/// Soft Bellman operator v(s) = tau * log sum_a exp(Q_v(s, a) / tau).
template <class Real>
Vec<Real> soft_bellman(const MomdpInstance& m, const Vec<Real>& w, Real tau, const Vec<Real>& v) {
  Vec<Real> out(m.num_states());
  for (int s = 0; s < m.num_states(); ++s) {
    const Vec<Real> q = backup_row<Real>(m, w, v, s);
    out(s) = tau * log_sum_exp(Vec<Real>(q / tau));
  }
  return out;
}

template <class Real>
struct SoftSolution {
  Vec<Real> v;
  Mat<Real> q;
  Mat<Real> log_pi;
  Real residual = 0;
  long iterations = 0;
};

template <class Real>
SoftSolution<Real> soft_value_iteration(const MomdpInstance& m, const Vec<Real>& w, Real tau, Real tol,
                                        long max_iter) {
  const int S = m.num_states(), A = m.num_actions();
  SoftSolution<Real> out;
  Vec<Real> v = Vec<Real>::Zero(S);
  Real diff = 0;
  long it = 0;
  for (; it < max_iter; ++it) {
    Vec<Real> next = soft_bellman<Real>(m, w, tau, v);
    diff = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (diff <= tol) break;
  }
  if (!(diff <= tol)) throw MaxIterExceeded(static_cast<double>(diff));
  out.v = v;
  out.q.resize(S, A);
  out.log_pi.resize(S, A);
  for (int s = 0; s < S; ++s) {
    const Vec<Real> q = backup_row<Real>(m, w, v, s);
    out.q.row(s) = q.transpose();
    out.log_pi.row(s) = log_softmax(Vec<Real>(q / tau)).transpose();
  }
  out.residual = diff;
  out.iterations = it + 1;
  return out;
}

}  // namespace mmrl::detail
