#pragma once

// Bernoulli (l0) estimation: the approximate estimate that refits least
// squares after LOIRE has isolated the outliers, an exhaustive oracle for the
// exact l0 problem on small instances, and the Bernoulli log-likelihood.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "loire/core.hpp"
#include "loire/loire.hpp"

namespace loire {

/// Sorted, duplicate-free row indices (0-based) flagged as outliers.
class SupportSet {
 public:
  SupportSet() = default;

  /// Sorts and deduplicates; every index must lie in [0, m).
  SupportSet(std::vector<Index> indices, Index m) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= m)) {
      throw DomainError("support index outside [0, " + std::to_string(m) + ")");
    }
  }

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(Index i) const { return std::binary_search(indices_.begin(), indices_.end(), i); }

  /// Rows of [0, m) not in the set, ascending.
  std::vector<Index> complement(Index m) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(m - size()));
    for (Index i = 0; i < m; ++i) {
      if (!contains(i)) out.push_back(i);
    }
    return out;
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

template <typename Scalar>
struct BemSolution {
  SupportSet support;
  DenseVector<Scalar> x;  // least-squares refit on the rows outside `support`
  DenseVector<Scalar> b;  // y - A x on `support`, zero elsewhere
  std::optional<LoireSolution<Scalar>> loire;  // stage-1 result; empty for the oracle
};

template <typename Scalar>
struct OracleConfig {
  Scalar t = Scalar(0);   // radius on the clean-row residual
  Index max_support = 0;  // largest support size enumerated
};

/// Largest number of candidate supports the oracle will visit.
inline constexpr std::uint64_t kOracleEnumerationLimit = 1'000'000;

/// Default support-detection tolerance: 1e-6 * (1 + ||y||_inf).
template <typename Derived>
typename Derived::Scalar default_zero_tol(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1e-6) * (Scalar(1) + y.template lpNorm<Eigen::Infinity>());
}

template <typename Derived>
SupportSet detect_support(const Eigen::MatrixBase<Derived>& b, typename Derived::Scalar zero_tol) {
  if (!(zero_tol >= 0)) throw DomainError("zero_tol must be >= 0");
  std::vector<Index> idx;
  for (Index i = 0; i < b.size(); ++i) {
    if (std::abs(b(i)) > zero_tol) idx.push_back(i);
  }
  return SupportSet(std::move(idx), b.size());
}

template <typename Scalar>
SupportSet detect_support(const LoireSolution<Scalar>& sol, Scalar zero_tol) {
  return detect_support(sol.b, zero_tol);
}

namespace detail {

// Refit on the rows outside `support`. With no rows left the minimum-norm
// answer is x = 0.
template <typename Scalar>
DenseVector<Scalar> refit_outside(const DenseMatrix<Scalar>& a, const DenseVector<Scalar>& y,
                                  const SupportSet& support) {
  const std::vector<Index> rows = support.complement(a.rows());
  if (rows.empty()) return DenseVector<Scalar>::Zero(a.cols());
  return least_squares_solve(DenseMatrix<Scalar>(a(rows, Eigen::all)),
                             DenseVector<Scalar>(y(rows)));
}

template <typename Scalar>
DenseVector<Scalar> residual_on(const DenseMatrix<Scalar>& a, const DenseVector<Scalar>& y,
                                const DenseVector<Scalar>& x, const SupportSet& support) {
  const DenseVector<Scalar> r = y - a * x;
  DenseVector<Scalar> b = DenseVector<Scalar>::Zero(y.size());
  for (Index i : support.indices()) b(i) = r(i);
  return b;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    out = out * (n - k + i) / i;
    if (out > (std::uint64_t{1} << 62)) return out;
  }
  return out;
}

}  // namespace detail

/// Number of supports of size <= max_support over m rows, saturating above
/// the enumeration limit.
inline std::uint64_t oracle_candidate_count(Index m, Index max_support) {
  std::uint64_t total = 0;
  for (Index k = 0; k <= max_support; ++k) {
    total += detail::binomial(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k));
    if (total > kOracleEnumerationLimit) return total;
  }
  return total;
}

/// Approximate Bernoulli estimate: LOIRE support detection followed by a
/// least-squares refit on the remaining rows.
template <typename DerivedA, typename DerivedY>
BemSolution<typename DerivedA::Scalar> app_bem(const Eigen::MatrixBase<DerivedA>& a_in,
                                               const Eigen::MatrixBase<DerivedY>& y_in,
                                               const LoireConfig<typename DerivedA::Scalar>& cfg,
                                               typename DerivedA::Scalar zero_tol) {
  using Scalar = typename DerivedA::Scalar;
  const DenseMatrix<Scalar> a = a_in;
  const DenseVector<Scalar> y = y_in;

  BemSolution<Scalar> out;
  out.loire = loire_solve(a, y, cfg);
  out.support = detect_support(*out.loire, zero_tol);
  if (out.support.size() == a.rows()) {
    throw InfeasibleError("every row was flagged as an outlier; nothing left to refit");
  }
  out.x = detail::refit_outside(a, y, out.support);
  out.b = detail::residual_on(a, y, out.x, out.support);
  return out;
}

/// Exhaustive l0 estimate. Supports are visited by increasing size, then
/// lexicographically; the first whose clean-row refit residual is within t
/// is returned, so ties resolve to the lexicographically smallest set.
template <typename DerivedA, typename DerivedY>
BemSolution<typename DerivedA::Scalar> bernoulli_oracle(
    const Eigen::MatrixBase<DerivedA>& a_in, const Eigen::MatrixBase<DerivedY>& y_in,
    const OracleConfig<typename DerivedA::Scalar>& cfg) {
  using Scalar = typename DerivedA::Scalar;
  if (a_in.rows() != y_in.rows() || y_in.cols() != 1) {
    throw DimensionError("bernoulli_oracle: A is " + detail::shape(a_in.rows(), a_in.cols()) +
                         ", y is " + detail::shape(y_in.rows(), y_in.cols()));
  }
  require_nonempty(a_in, "oracle matrix");
  require_finite(a_in, "oracle matrix");
  require_finite(y_in, "oracle response");
  const Index m = a_in.rows();
  if (!(cfg.t >= 0)) throw DomainError("oracle radius t must be >= 0");
  if (cfg.max_support < 0 || cfg.max_support > m) {
    throw DomainError("oracle max_support must lie in [0, " + std::to_string(m) + "]");
  }
  if (oracle_candidate_count(m, cfg.max_support) > kOracleEnumerationLimit) {
    throw DomainError("oracle enumeration exceeds " + std::to_string(kOracleEnumerationLimit) +
                      " candidate supports; lower max_support");
  }

  const DenseMatrix<Scalar> a = a_in;
  const DenseVector<Scalar> y = y_in;
  std::vector<Index> combo;
  for (Index k = 0; k <= cfg.max_support; ++k) {
    combo.resize(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j) combo[static_cast<std::size_t>(j)] = j;
    while (true) {
      SupportSet s(combo, m);
      DenseVector<Scalar> x = detail::refit_outside(a, y, s);
      const std::vector<Index> rows = s.complement(m);
      const Scalar resid = rows.empty() ? Scalar(0) : (y(rows) - a(rows, Eigen::all) * x).norm();
      if (resid <= cfg.t) {
        BemSolution<Scalar> out;
        out.b = detail::residual_on(a, y, x, s);
        out.x = std::move(x);
        out.support = std::move(s);
        return out;
      }
      // Next k-combination of [0, m) in lexicographic order.
      Index j = k - 1;
      while (j >= 0 && combo[static_cast<std::size_t>(j)] == m - k + j) --j;
      if (j < 0) break;
      ++combo[static_cast<std::size_t>(j)];
      for (Index l = j + 1; l < k; ++l) {
        combo[static_cast<std::size_t>(l)] = combo[static_cast<std::size_t>(l - 1)] + 1;
      }
    }
  }
  throw InfeasibleError("infeasible at this t: no support of size <= " +
                        std::to_string(cfg.max_support) + " meets the residual radius");
}

/// (m - k) ln p + k ln(1 - p), with p the probability of a normal measurement.
template <typename Scalar = double>
Scalar bernoulli_log_likelihood(Index outlier_count, Index m, Scalar p) {
  if (!(p > Scalar(0.5) && p < Scalar(1))) throw DomainError("p must lie in (1/2, 1)");
  if (m < 0 || outlier_count < 0 || outlier_count > m) {
    throw DomainError("outlier_count must lie in [0, m]");
  }
  return static_cast<Scalar>(m - outlier_count) * std::log(p) +
         static_cast<Scalar>(outlier_count) * std::log1p(-p);
}

}  // namespace loire
