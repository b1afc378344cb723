#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace mmrl {

/// log(sum(exp(x))) with the maximum shifted out.
template <class Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
  using Real = typename Derived::Scalar;
  const Real top = x.maxCoeff();
  if (!std::isfinite(static_cast<double>(top))) return top;
  using std::exp;
  using std::log;
  return top + log((x.array() - top).exp().sum());
}

template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> log_softmax(
    const Eigen::MatrixBase<Derived>& x) {
  return (x.array() - log_sum_exp(x)).matrix();
}

/// Max-shifted softmax, renormalized explicitly.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& x) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

/// Index of the smallest entry; ties go to the lowest index.
template <class Derived>
int argmin_lowest(const Eigen::MatrixBase<Derived>& x) {
  int best = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i)
    if (x(i) < x(best)) best = static_cast<int>(i);
  return best;
}

/// -sum p log p with 0 log 0 = 0.
template <class Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p) {
  using Real = typename Derived::Scalar;
  using std::log;
  Real h = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0) h -= p(i) * log(p(i));
  return h;
}

}  // namespace mmrl
