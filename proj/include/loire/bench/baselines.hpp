#pragma once

// Non-robust and l1 reference estimators used for comparisons.

#include "loire/core.hpp"

namespace loire::bench {

/// Ordinary least squares (minimum-norm).
DenseVector<double> baseline_ols(const DenseMatrix<double>& a, const DenseVector<double>& y);

struct LadResult {
  DenseVector<double> x;
  Index iterations = 0;
  bool converged = false;
};

/// Least absolute deviations, min ||y - A x||_1, by ADMM on the splitting
/// z = A x - y:
///
///   x <- pinv(A) (y + z - u)
///   z <- soft_threshold(A x - y + u, 1 / rho)
///   u <- u + A x - y - z
///
/// Stops when both primal and dual residuals fall below
/// tol * sqrt(dim) + tol * (scale of the corresponding iterate).
/// A must have full column rank.
LadResult baseline_lad(const DenseMatrix<double>& a, const DenseVector<double>& y,
                       double rho = 1.0, double tol = 1e-9, Index max_iter = 100000);

}  // namespace loire::bench
