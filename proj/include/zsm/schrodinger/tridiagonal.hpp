#pragma once

#include "zsm/core/error.hpp"

#include <Eigen/Core>

namespace zsm {

/// Solves a tridiagonal system by the Thomas algorithm. `lower(i)` couples
/// row i to i - 1 (lower(0) unused), `upper(i)` couples row i to i + 1
/// (upper(n - 1) unused).
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& lower,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& diag,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& upper,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& rhs) {
  const Eigen::Index n = diag.size();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> c(n), x(n);
  Scalar beta = diag(0);
  if (beta == Scalar(0)) throw Error("solve_tridiagonal: zero pivot");
  x(0) = rhs(0) / beta;
  for (Eigen::Index i = 1; i < n; ++i) {
    c(i) = upper(i - 1) / beta;
    beta = diag(i) - lower(i) * c(i);
    if (beta == Scalar(0)) throw Error("solve_tridiagonal: zero pivot");
    x(i) = (rhs(i) - lower(i) * x(i - 1)) / beta;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) -= c(i + 1) * x(i + 1);
  return x;
}

/// Cyclic tridiagonal solve (Sherman-Morrison). `lower(0)` couples row 0 to
/// row n - 1 and `upper(n - 1)` couples row n - 1 to row 0.
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> solve_cyclic_tridiagonal(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& lower,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& diag,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& upper,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& rhs) {
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = diag.size();
  const Scalar alpha = upper(n - 1);
  const Scalar beta = lower(0);
  const Scalar gamma = -diag(0);
  Vec d = diag;
  d(0) -= gamma;
  d(n - 1) -= alpha * beta / gamma;
  const Vec x = solve_tridiagonal<Scalar>(lower, d, upper, rhs);
  Vec u = Vec::Zero(n);
  u(0) = gamma;
  u(n - 1) = alpha;
  const Vec z = solve_tridiagonal<Scalar>(lower, d, upper, u);
  const Scalar fact = (x(0) + beta * x(n - 1) / gamma) / (Scalar(1) + z(0) + beta * z(n - 1) / gamma);
  return x - fact * z;
}

/// y = T x for a (possibly cyclic) tridiagonal T stored as above.
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> tridiagonal_apply(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& lower,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& diag,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& upper,
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& x, bool cyclic) {
  const Eigen::Index n = diag.size();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> y = diag * x;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) y(i) += lower(i) * x(i - 1);
    if (i + 1 < n) y(i) += upper(i) * x(i + 1);
  }
  if (cyclic) {
    y(0) += lower(0) * x(n - 1);
    y(n - 1) += upper(n - 1) * x(0);
  }
  return y;
}

}  // namespace zsm
