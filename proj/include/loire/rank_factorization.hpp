#pragma once

// Robust rank factorization Y ~ A X + B with unit-norm dictionary columns,
//
//   minimize  ||B||_1 + (lambda / 2) ||Y - A X - B||_F^2,
//
// by alternating a truncated SVD of Y - B (which yields A with orthonormal
// columns and X = Sigma V^T) with elementwise shrinkage of Y - A X.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loire/core.hpp"

namespace loire {

template <typename Scalar>
struct FactorizationConfig {
  Index rank = 1;
  Scalar lambda = Scalar(1);
  Scalar tol = Scalar(1e-7);  // stop when ||B_{k+1} - B_k||_F <= tol
  Index max_iter = 500;

  /// tol = 1e-7 * (1 + ||Y||_F), max_iter = 500.
  template <typename DerivedY>
  static FactorizationConfig with_defaults(Index rank, Scalar lambda,
                                           const Eigen::MatrixBase<DerivedY>& y) {
    return FactorizationConfig{rank, lambda, Scalar(1e-7) * (Scalar(1) + y.norm()), 500};
  }

  void validate(Index m, Index n) const {
    if (rank < 1 || rank > std::min(m, n)) {
      throw DomainError("rank " + std::to_string(rank) + " outside [1, " +
                        std::to_string(std::min(m, n)) + "]");
    }
    if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and > 0");
    if (!(tol > 0) || !std::isfinite(tol)) throw DomainError("tol must be finite and > 0");
    if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  }
};

/// lambda = multiplier * sqrt(max(m, n)) / ||Y||_F; falls back to the
/// multiplier alone for an all-zero Y.
template <typename Derived>
typename Derived::Scalar default_matrix_lambda(const Eigen::MatrixBase<Derived>& y,
                                               typename Derived::Scalar multiplier = 1) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = y.norm();
  if (!(norm > 0)) return multiplier;
  return multiplier * std::sqrt(static_cast<Scalar>(std::max(y.rows(), y.cols()))) / norm;
}

template <typename Scalar>
struct FactorizationSolution {
  DenseMatrix<Scalar> a;  // m x r dictionary, unit columns
  DenseMatrix<Scalar> x;  // r x n coefficients
  DenseMatrix<Scalar> b;  // m x n sparse corruption
  std::vector<Scalar> objective_trace;
  Index iterations = 0;
  bool converged = false;

  DenseMatrix<Scalar> low_rank() const { return a * x; }
};

template <typename DerivedY, typename DerivedA, typename DerivedX, typename DerivedB>
typename DerivedY::Scalar rrf_objective(const Eigen::MatrixBase<DerivedY>& y,
                                        const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedX>& x,
                                        const Eigen::MatrixBase<DerivedB>& b,
                                        typename DerivedY::Scalar lambda) {
  if (a.rows() != y.rows() || x.cols() != y.cols() || a.cols() != x.rows() ||
      b.rows() != y.rows() || b.cols() != y.cols()) {
    throw DimensionError("rrf_objective: Y " + detail::shape(y.rows(), y.cols()) + ", A " +
                         detail::shape(a.rows(), a.cols()) + ", X " +
                         detail::shape(x.rows(), x.cols()) + ", B " +
                         detail::shape(b.rows(), b.cols()));
  }
  using Scalar = typename DerivedY::Scalar;
  return b.cwiseAbs().sum() + lambda / Scalar(2) * (y - a * x - b).squaredNorm();
}

/// Dictionary/coefficient step: A = U[:, :r], X = (Sigma V^T)[:r, :] from the
/// SVD of Y - B.
template <typename DerivedY, typename DerivedB>
std::pair<DenseMatrix<typename DerivedY::Scalar>, DenseMatrix<typename DerivedY::Scalar>>
rrf_factor_step(const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedB>& b,
                Index rank) {
  auto svd = truncated_svd(y - b, rank);
  DenseMatrix<typename DerivedY::Scalar> x = svd.sigma.asDiagonal() * svd.vt;
  return {std::move(svd.u), std::move(x)};
}

/// Corruption step: B = soft_threshold(Y - A X, 1 / lambda).
template <typename DerivedY, typename DerivedA, typename DerivedX>
DenseMatrix<typename DerivedY::Scalar> rrf_shrink_step(const Eigen::MatrixBase<DerivedY>& y,
                                                       const Eigen::MatrixBase<DerivedA>& a,
                                                       const Eigen::MatrixBase<DerivedX>& x,
                                                       typename DerivedY::Scalar lambda) {
  using Scalar = typename DerivedY::Scalar;
  return soft_threshold(y - a * x, Scalar(1) / lambda);
}

/// Coefficient step for a known dictionary: X = pinv(A) (Y - B), i.e. the
/// LOIRE x-update applied to every column of Y at once.
template <typename DerivedY, typename DerivedA, typename DerivedB>
DenseMatrix<typename DerivedY::Scalar> rrf_coefficient_step(const Eigen::MatrixBase<DerivedY>& y,
                                                            const Eigen::MatrixBase<DerivedA>& a,
                                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedY::Scalar;
  if (a.rows() != y.rows() || b.rows() != y.rows() || b.cols() != y.cols()) {
    throw DimensionError("rrf_coefficient_step: shape mismatch");
  }
  const Pseudoinverse<Scalar> pinv(a);
  return pinv.matrix() * (y - b);
}

template <typename DerivedY>
FactorizationSolution<typename DerivedY::Scalar> rrf_solve(
    const Eigen::MatrixBase<DerivedY>& y_in,
    const FactorizationConfig<typename DerivedY::Scalar>& cfg) {
  using Scalar = typename DerivedY::Scalar;
  using Matrix = DenseMatrix<Scalar>;
  require_nonempty(y_in, "Y");
  cfg.validate(y_in.rows(), y_in.cols());
  require_finite(y_in, "Y");
  const Matrix y = y_in;

  FactorizationSolution<Scalar> sol;
  sol.b = Matrix::Zero(y.rows(), y.cols());
  for (Index k = 0; k < cfg.max_iter; ++k) {
    std::tie(sol.a, sol.x) = rrf_factor_step(y, sol.b, cfg.rank);
    Matrix next_b = rrf_shrink_step(y, sol.a, sol.x, cfg.lambda);
    const Scalar step = (next_b - sol.b).norm();
    sol.b = std::move(next_b);
    sol.objective_trace.push_back(rrf_objective(y, sol.a, sol.x, sol.b, cfg.lambda));
    sol.iterations = k + 1;
    if (step <= cfg.tol) {
      sol.converged = true;
      break;
    }
  }

  // Refit the low-rank part to the final B; Eckart-Young guarantees this
  // cannot increase the objective beyond rounding.
  auto [a, x] = rrf_factor_step(y, sol.b, cfg.rank);
  const Scalar f = rrf_objective(y, a, x, sol.b, cfg.lambda);
  const Scalar last = sol.objective_trace.back();
  if (f <= last) {
    sol.a = std::move(a);
    sol.x = std::move(x);
    sol.objective_trace.push_back(f);
  }
  return sol;
}

}  // namespace loire
