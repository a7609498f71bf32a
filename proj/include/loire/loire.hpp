#pragma once

// l1-regularized outlier isolation and regression:
//
//   minimize  ||b||_1 + (lambda / 2) ||y - A x - b||_2^2
//
// solved by alternating direction descent: an exact least-squares step in x
// followed by an exact soft-threshold step in b, starting from b = 0.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include "loire/core.hpp"

namespace loire {

template <typename Scalar>
struct LoireConfig {
  Scalar lambda = Scalar(1);  // penalty weight, > 0
  Scalar tol = Scalar(1e-8);  // stop when ||b_{k+1} - b_k||_2 <= tol
  Index max_iter = 1000;

  /// tol = 1e-8 * (1 + ||y||_2), max_iter = 1000.
  template <typename DerivedY>
  static LoireConfig with_defaults(Scalar lambda, const Eigen::MatrixBase<DerivedY>& y) {
    return LoireConfig{lambda, Scalar(1e-8) * (Scalar(1) + y.norm()), 1000};
  }

  void validate() const {
    if (!(lambda > 0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and > 0");
    if (!(tol > 0) || !std::isfinite(tol)) throw DomainError("tol must be finite and > 0");
    if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  }
};

template <typename Scalar>
struct LoireSolution {
  DenseVector<Scalar> x;
  DenseVector<Scalar> b;
  std::vector<Scalar> objective_trace;  // f after every accepted update
  Index iterations = 0;
  bool converged = false;
  // True when the final iterate was replaced by the exact minimizer solved on
  // the identified outlier support and signs.
  bool polished = false;
};

template <typename DerivedA, typename DerivedY, typename DerivedX, typename DerivedB>
typename DerivedA::Scalar loire_objective(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedY>& y,
                                          const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedB>& b,
                                          typename DerivedA::Scalar lambda) {
  if (a.rows() != y.rows() || a.cols() != x.rows() || b.rows() != y.rows() || y.cols() != 1 ||
      x.cols() != 1 || b.cols() != 1) {
    throw DimensionError("loire_objective: A " + detail::shape(a.rows(), a.cols()) + ", y " +
                         detail::shape(y.rows(), y.cols()) + ", x " +
                         detail::shape(x.rows(), x.cols()) + ", b " +
                         detail::shape(b.rows(), b.cols()));
  }
  using Scalar = typename DerivedA::Scalar;
  return b.template lpNorm<1>() + lambda / Scalar(2) * (y - a * x - b).squaredNorm();
}

/// ADDA solver bound to one measurement matrix. The pseudoinverse is computed
/// once and shared by every solve, so one instance may serve many right-hand
/// sides concurrently.
template <typename Scalar>
class LoireSolver {
 public:
  using Matrix = DenseMatrix<Scalar>;
  using Vector = DenseVector<Scalar>;

  explicit LoireSolver(Matrix a) : a_(std::move(a)), pinv_(a_) {}

  const Matrix& matrix() const { return a_; }
  const Pseudoinverse<Scalar>& pseudoinverse() const { return pinv_; }

  /// x = pinv(A) (y - b)
  template <typename DerivedY, typename DerivedB>
  Vector update_coefficients(const Eigen::MatrixBase<DerivedY>& y,
                             const Eigen::MatrixBase<DerivedB>& b) const {
    check_rhs(y, "y");
    check_rhs(b, "b");
    return pinv_.solve(y - b);
  }

  /// b = soft_threshold(y - A x, 1 / lambda)
  template <typename DerivedY, typename DerivedX>
  Vector update_outliers(const Eigen::MatrixBase<DerivedY>& y,
                         const Eigen::MatrixBase<DerivedX>& x, Scalar lambda) const {
    check_rhs(y, "y");
    if (x.rows() != a_.cols()) {
      throw DimensionError("x has length " + std::to_string(x.rows()) + ", expected " +
                           std::to_string(a_.cols()));
    }
    return soft_threshold(y - a_ * x, Scalar(1) / lambda);
  }

  template <typename DerivedY>
  LoireSolution<Scalar> solve(const Eigen::MatrixBase<DerivedY>& y_in,
                              const LoireConfig<Scalar>& cfg) const {
    cfg.validate();
    check_rhs(y_in, "y");
    require_finite(y_in, "y");
    const Vector y = y_in;

    LoireSolution<Scalar> sol;
    sol.b = Vector::Zero(a_.rows());
    for (Index k = 0; k < cfg.max_iter; ++k) {
      sol.x = update_coefficients(y, sol.b);
      Vector next_b = update_outliers(y, sol.x, cfg.lambda);
      const Scalar step = (next_b - sol.b).norm();
      sol.b = std::move(next_b);
      sol.objective_trace.push_back(loire_objective(a_, y, sol.x, sol.b, cfg.lambda));
      sol.iterations = k + 1;
      if (step <= cfg.tol) {
        sol.converged = true;
        break;
      }
    }

    if (sol.converged && polish(y, cfg.lambda, sol)) return sol;

    // Close with an x-step so the coefficient block is exactly optimal for
    // the returned outlier vector.
    Vector x = update_coefficients(y, sol.b);
    const Scalar f = loire_objective(a_, y, x, sol.b, cfg.lambda);
    if (f <= sol.objective_trace.back()) {
      sol.x = std::move(x);
      sol.objective_trace.push_back(f);
    }
    return sol;
  }

 private:
  template <typename Derived>
  void check_rhs(const Eigen::MatrixBase<Derived>& v, const char* what) const {
    if (v.rows() != a_.rows() || v.cols() != 1) {
      throw DimensionError(std::string(what) + " is " + detail::shape(v.rows(), v.cols()) +
                           ", expected " + std::to_string(a_.rows()) + "x1");
    }
  }

  // Once the iterates have settled, the outlier support S and its signs s are
  // known. The optimality conditions then reduce to the linear system
  //   A_c^T A_c x = A_c^T y_c + A_S^T s / lambda,   b_S = y_S - A_S x - s / lambda,
  // with c the complement of S. The candidate is accepted only if it is
  // sign-consistent, keeps every complement residual inside the dead zone and
  // does not increase the objective.
  bool polish(const Vector& y, Scalar lambda, LoireSolution<Scalar>& sol) const {
    const Index m = a_.rows();
    const Index n = a_.cols();
    const Scalar tau = Scalar(1) / lambda;
    std::vector<Index> inside, outside;
    for (Index i = 0; i < m; ++i) (sol.b(i) != 0 ? inside : outside).push_back(i);
    if (static_cast<Index>(outside.size()) < n) return false;

    Matrix a_out = a_(outside, Eigen::all);
    Eigen::ColPivHouseholderQR<Matrix> qr(a_out);
    if (qr.rank() < n) return false;

    Vector rhs = a_out.transpose() * y(outside);
    for (Index i : inside) {
      const Scalar s = sol.b(i) > 0 ? Scalar(1) : Scalar(-1);
      rhs += a_.row(i).transpose() * (s * tau);
    }
    const Matrix gram = a_out.transpose() * a_out;
    Vector x = gram.ldlt().solve(rhs);
    if (!x.allFinite()) return false;

    const Vector r = y - a_ * x;
    Vector b = Vector::Zero(m);
    for (Index i : inside) {
      const Scalar s = sol.b(i) > 0 ? Scalar(1) : Scalar(-1);
      b(i) = r(i) - s * tau;
      if (!(b(i) * s > 0)) return false;
    }
    for (Index i : outside) {
      if (std::abs(r(i)) > tau) return false;
    }
    // The exact minimizer may exceed the last iterate's value by rounding only.
    const Scalar f = loire_objective(a_, y, x, b, lambda);
    const Scalar last = sol.objective_trace.back();
    const Scalar slack = Scalar(16) * std::numeric_limits<Scalar>::epsilon() *
                         (Scalar(1) + std::abs(last));
    if (!(f <= last + slack)) return false;

    sol.x = std::move(x);
    sol.b = std::move(b);
    sol.objective_trace.push_back(f);
    sol.polished = true;
    return true;
  }

  Matrix a_;
  Pseudoinverse<Scalar> pinv_;
};

template <typename DerivedA, typename DerivedY>
LoireSolution<typename DerivedA::Scalar> loire_solve(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedY>& y,
    const LoireConfig<typename DerivedA::Scalar>& cfg) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != y.rows() || y.cols() != 1) {
    throw DimensionError("loire_solve: A is " + detail::shape(a.rows(), a.cols()) + ", y is " +
                         detail::shape(y.rows(), y.cols()));
  }
  cfg.validate();
  return LoireSolver<Scalar>(DenseMatrix<Scalar>(a)).solve(y, cfg);
}

}  // namespace loire
