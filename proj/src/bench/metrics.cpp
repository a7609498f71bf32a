#include "loire/bench/metrics.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace loire::bench {

DetectionMetrics DetectionMetrics::from_counts(Index tp, Index fn, Index fp) {
  if (tp < 0 || fn < 0 || fp < 0) throw DomainError("detection counts must be >= 0");
  DetectionMetrics m;
  m.tp = tp;
  m.fn = fn;
  m.fp = fp;
  m.dr = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  m.pre = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  m.f = m.dr + m.pre > 0.0 ? 2.0 * m.dr * m.pre / (m.dr + m.pre) : 0.0;
  return m;
}

namespace {

void normalize(std::vector<Index>& v, Index universe, const char* what) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (!v.empty() && (v.front() < 0 || v.back() >= universe)) {
    throw DomainError(std::string(what) + " position outside [0, " + std::to_string(universe) +
                      ")");
  }
}

}  // namespace

DetectionMetrics compute_metrics(std::vector<Index> detected, std::vector<Index> truth,
                                 Index universe) {
  normalize(detected, universe, "detected");
  normalize(truth, universe, "truth");
  std::vector<Index> hit;
  std::set_intersection(detected.begin(), detected.end(), truth.begin(), truth.end(),
                        std::back_inserter(hit));
  const auto tp = static_cast<Index>(hit.size());
  return DetectionMetrics::from_counts(tp, static_cast<Index>(truth.size()) - tp,
                                       static_cast<Index>(detected.size()) - tp);
}

}  // namespace loire::bench
