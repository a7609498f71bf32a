#include "loire/bench/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "loire/bench/random.hpp"

namespace loire::bench {

Index SimSpec::rank() const {
  // The small offset keeps e.g. 0.05 * 200 from rounding up to 11.
  const double r = std::ceil(rank_frac * static_cast<double>(n) - 1e-9);
  return std::clamp<Index>(static_cast<Index>(r), 1, n);
}

void SimSpec::validate() const {
  if (n < 1) throw DomainError("simulation dimension must be >= 1");
  if (!(rank_frac > 0.0 && rank_frac <= 1.0)) throw DomainError("rank_frac must lie in (0, 1]");
  if (!(spike_density >= 0.0 && spike_density <= 1.0)) {
    throw DomainError("spike density must lie in [0, 1]");
  }
  if (!(dense_noise_scale >= 0.0) || !std::isfinite(dense_noise_scale)) {
    throw DomainError("dense noise scale must be finite and >= 0");
  }
  if (!(spike_amplitude >= 0.0) || !std::isfinite(spike_amplitude)) {
    throw DomainError("spike amplitude must be finite and >= 0");
  }
}

SimInstance generate_sim(const SimSpec& spec) {
  spec.validate();
  const Index n = spec.n;
  const Index r = spec.rank();
  Rng rng(spec.seed);

  Matrix p(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) p(i, j) = rng.uniform();

  SimInstance out;
  if (spec.symmetric) {
    out.l = p * p.transpose();
  } else {
    Matrix q(n, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < n; ++i) q(i, j) = rng.uniform();
    out.l = p * q.transpose();
  }

  out.g.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      out.g(i, j) = spec.dense_noise_scale * (spec.gaussian_noise ? rng.normal() : rng.uniform());
    }
  }

  out.b_true = Matrix::Zero(n, n);
  for (Index k = 0; k < n * n; ++k) {
    if (rng.uniform() < spec.spike_density) {
      out.b_true(k) = spec.spike_amplitude * rng.uniform();
      out.true_support.push_back(k);
    }
  }

  out.y = out.l + out.g + out.b_true;
  return out;
}

void RegressionSpec::validate() const {
  if (m < 1 || n < 1) throw DomainError("regression dimensions must be >= 1");
  if (outliers < 0 || outliers > m) throw DomainError("outlier count must lie in [0, m]");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise sigma must be >= 0");
  if (!(outlier_scale >= 0.0)) throw DomainError("outlier scale must be >= 0");
}

RegressionInstance generate_regression(const RegressionSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  RegressionInstance out;
  out.a.resize(spec.m, spec.n);
  for (Index j = 0; j < spec.n; ++j)
    for (Index i = 0; i < spec.m; ++i) out.a(i, j) = rng.normal();
  out.x_true.resize(spec.n);
  for (Index j = 0; j < spec.n; ++j) out.x_true(j) = rng.normal();
  out.noise.resize(spec.m);
  for (Index i = 0; i < spec.m; ++i) out.noise(i) = spec.noise_sigma * rng.normal();
  out.y = out.a * out.x_true + out.noise;

  // Partial Fisher-Yates for the outlier rows.
  std::vector<Index> rows(static_cast<std::size_t>(spec.m));
  for (Index i = 0; i < spec.m; ++i) rows[static_cast<std::size_t>(i)] = i;
  for (Index k = 0; k < spec.outliers; ++k) {
    const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.m - k)));
    std::swap(rows[static_cast<std::size_t>(k)], rows[static_cast<std::size_t>(pick)]);
  }
  out.outlier_rows.assign(rows.begin(), rows.begin() + spec.outliers);
  std::sort(out.outlier_rows.begin(), out.outlier_rows.end());
  for (Index i : out.outlier_rows) {
    const double magnitude = spec.noise_sigma * spec.outlier_scale * (1.0 + rng.uniform());
    out.y(i) += rng.uniform() < 0.5 ? -magnitude : magnitude;
  }
  return out;
}

}  // namespace loire::bench
