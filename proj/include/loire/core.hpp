#pragma once

// Dense linear-algebra primitives shared by every solver: scalar-templated
// matrix aliases, input validation, soft thresholding, minimum-norm least
// squares and truncated SVD.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SVD>

namespace loire {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for parameters outside their admissible range (including non-finite data).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a problem instance admits no solution under the given settings.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string shape(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace detail

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.derived().allFinite()) {
    throw DomainError(std::string(what) + " contains NaN or Inf");
  }
}

template <typename Derived>
void require_nonempty(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw DimensionError(std::string(what) + " is empty (" +
                         detail::shape(m.rows(), m.cols()) + ")");
  }
}

// ---------------------------------------------------------------------------
// Soft thresholding
// ---------------------------------------------------------------------------

/// sign(v) * max(|v| - tau, 0): the proximal operator of tau*|.|.
template <typename Scalar>
constexpr Scalar soft_threshold(Scalar v, Scalar tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return Scalar(0);
}

template <typename Scalar>
struct SoftThresholdOp {
  Scalar tau;
  Scalar operator()(const Scalar& v) const { return soft_threshold(v, tau); }
};

/// Elementwise shrinkage. Returns a lazy expression, so
/// `b = soft_threshold(y - a * x, tau)` evaluates in a single pass.
template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (!(tau >= Scalar(0))) throw DomainError("soft_threshold: tau must be >= 0");
  return v.unaryExpr(SoftThresholdOp<Scalar>{tau});
}

// ---------------------------------------------------------------------------
// Least squares
// ---------------------------------------------------------------------------

/// Moore-Penrose pseudoinverse of a fixed matrix, factorized once via SVD.
///
/// Singular values at or below max(m, n) * eps * sigma_max are treated as
/// zero, so `solve` returns the minimum-norm minimizer of ||y - A x||_2 for
/// rank-deficient A as well.
template <typename Scalar>
class Pseudoinverse {
 public:
  using Matrix = DenseMatrix<Scalar>;
  using Vector = DenseVector<Scalar>;

  explicit Pseudoinverse(const Eigen::Ref<const Matrix>& a) : rows_(a.rows()) {
    require_nonempty(a, "least squares matrix");
    require_finite(a, "least squares matrix");
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const Scalar sigma_max = sigma.size() > 0 ? sigma(0) : Scalar(0);
    cutoff_ = static_cast<Scalar>(std::max(a.rows(), a.cols())) *
              std::numeric_limits<Scalar>::epsilon() * sigma_max;
    rank_ = 0;
    Vector inv_sigma = Vector::Zero(sigma.size());
    for (Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > cutoff_) {
        inv_sigma(i) = Scalar(1) / sigma(i);
        ++rank_;
      }
    }
    pinv_ = svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
  }

  template <typename Derived>
  Vector solve(const Eigen::MatrixBase<Derived>& y) const {
    if (y.rows() != rows_) {
      throw DimensionError("least squares: matrix has " + std::to_string(rows_) +
                           " rows but right-hand side has " + std::to_string(y.rows()));
    }
    return pinv_ * y;
  }

  const Matrix& matrix() const { return pinv_; }
  Index rank() const { return rank_; }
  Scalar cutoff() const { return cutoff_; }

 private:
  Index rows_;
  Index rank_ = 0;
  Scalar cutoff_ = 0;
  Matrix pinv_;
};

/// Minimum-norm x minimizing ||y - A x||_2.
template <typename DerivedA, typename DerivedY>
DenseVector<typename DerivedA::Scalar> least_squares_solve(const Eigen::MatrixBase<DerivedA>& a,
                                                           const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != y.rows() || y.cols() != 1) {
    throw DimensionError("least_squares_solve: A is " + detail::shape(a.rows(), a.cols()) +
                         ", y is " + detail::shape(y.rows(), y.cols()));
  }
  require_finite(y, "least squares right-hand side");
  return Pseudoinverse<Scalar>(a).solve(y);
}

// ---------------------------------------------------------------------------
// Truncated SVD
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TruncatedSvd {
  DenseMatrix<Scalar> u;      // m x r, orthonormal columns
  DenseVector<Scalar> sigma;  // r, nonincreasing, >= 0
  DenseMatrix<Scalar> vt;     // r x n, orthonormal rows

  DenseMatrix<Scalar> reconstruct() const { return u * sigma.asDiagonal() * vt; }
};

/// Best rank-r approximation in Frobenius norm (Eckart-Young).
///
/// For zero singular values the columns of u still come from the orthonormal
/// basis completed by the SVD routine.
template <typename Derived>
TruncatedSvd<typename Derived::Scalar> truncated_svd(const Eigen::MatrixBase<Derived>& a,
                                                     Index r) {
  using Scalar = typename Derived::Scalar;
  using Matrix = DenseMatrix<Scalar>;
  require_nonempty(a, "truncated_svd input");
  const Index k = std::min(a.rows(), a.cols());
  if (r < 1 || r > k) {
    throw DomainError("truncated_svd: rank " + std::to_string(r) + " outside [1, " +
                      std::to_string(k) + "]");
  }
  require_finite(a, "truncated_svd input");
  Eigen::BDCSVD<Matrix> svd(a.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd<Scalar> out;
  out.u = svd.matrixU().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  out.vt = svd.matrixV().leftCols(r).transpose();
  return out;
}

}  // namespace loire
