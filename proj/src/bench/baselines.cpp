#include "loire/bench/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace loire::bench {

DenseVector<double> baseline_ols(const DenseMatrix<double>& a, const DenseVector<double>& y) {
  return least_squares_solve(a, y);
}

LadResult baseline_lad(const DenseMatrix<double>& a, const DenseVector<double>& y, double rho,
                       double tol, Index max_iter) {
  if (a.rows() != y.size()) {
    throw DimensionError("baseline_lad: A is " + detail::shape(a.rows(), a.cols()) +
                         ", y has length " + std::to_string(y.size()));
  }
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  require_finite(y, "y");

  const Pseudoinverse<double> pinv(a);
  if (pinv.rank() < a.cols()) throw DomainError("baseline_lad requires full column rank");

  const Index m = a.rows();
  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double sqrt_n = std::sqrt(static_cast<double>(a.cols()));

  LadResult out;
  DenseVector<double> z = DenseVector<double>::Zero(m);
  DenseVector<double> u = DenseVector<double>::Zero(m);
  DenseVector<double> ax(m);
  for (Index k = 0; k < max_iter; ++k) {
    out.x = pinv.solve(y + z - u);
    ax = a * out.x;
    const DenseVector<double> z_old = z;
    z = soft_threshold(ax - y + u, 1.0 / rho);
    u += ax - y - z;
    out.iterations = k + 1;

    const double primal = (ax - y - z).norm();
    const double dual = rho * (a.transpose() * (z - z_old)).norm();
    const double eps_primal =
        sqrt_m * tol + tol * std::max({ax.norm(), z.norm(), y.norm()});
    const double eps_dual = sqrt_n * tol + tol * rho * (a.transpose() * u).norm();
    if (primal <= eps_primal && dual <= eps_dual) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace loire::bench
