#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "loire/core.hpp"

namespace loire::bench {

/// Detection rate (recall), precision and F-measure over corrupted entries.
///
/// Empty denominators: dr = 1 when there is nothing to find, pre = 1 when
/// nothing was claimed, f = 0 when dr + pre = 0.
struct DetectionMetrics {
  Index tp = 0;
  Index fn = 0;
  Index fp = 0;
  double dr = 0.0;
  double pre = 0.0;
  double f = 0.0;

  static DetectionMetrics from_counts(Index tp, Index fn, Index fp);
};

/// Positions are linear indices in [0, universe); duplicates are ignored.
DetectionMetrics compute_metrics(std::vector<Index> detected, std::vector<Index> truth,
                                 Index universe);

/// Column-major linear indices of entries with |m_ij| > zero_tol.
template <typename Derived>
std::vector<Index> support_positions(const Eigen::DenseBase<Derived>& m, double zero_tol) {
  std::vector<Index> out;
  const auto& d = m.derived();
  for (Index j = 0; j < d.cols(); ++j) {
    for (Index i = 0; i < d.rows(); ++i) {
      if (std::abs(d(i, j)) > zero_tol) out.push_back(j * d.rows() + i);
    }
  }
  return out;
}

}  // namespace loire::bench
