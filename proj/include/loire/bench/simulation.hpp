#pragma once

// Synthetic instances for the matrix (low-rank plus sparse) and regression
// (planted outlier) experiments. Every instance is a pure function of its
// spec, seed included.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "loire/core.hpp"

namespace loire::bench {

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

struct SimSpec {
  Index n = 100;                   // square dimension N
  double rank_frac = 0.05;         // r = ceil(rank_frac * N)
  double dense_noise_scale = 2.0;  // G = scale * uniform(0, 1)
  double spike_amplitude = 10.0;   // B = amplitude * uniform(0, 1) on the spike mask
  double spike_density = 0.05;     // Bernoulli spike probability per entry
  std::uint64_t seed = 0;
  bool symmetric = true;        // L = P P^T; otherwise L = P Q^T
  bool gaussian_noise = false;  // G = scale * N(0, 1) instead of uniform

  Index rank() const;
  void validate() const;
};

struct SimInstance {
  Matrix y;       // l + g + b_true
  Matrix l;       // low-rank truth
  Matrix g;       // dense noise
  Matrix b_true;  // planted spikes
  std::vector<Index> true_support;  // column-major linear indices of spikes, ascending
};

/// Draw order: P (column-major), [Q], G (column-major), then for every entry
/// in column-major order one mask draw and, for spikes, one amplitude draw.
SimInstance generate_sim(const SimSpec& spec);

struct RegressionSpec {
  Index m = 10;
  Index n = 2;
  Index outliers = 1;
  double noise_sigma = 0.1;
  double outlier_scale = 20.0;  // magnitudes in noise_sigma * [scale, 2 * scale)
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegressionInstance {
  Matrix a;
  Vector y;
  Vector x_true;
  Vector noise;
  std::vector<Index> outlier_rows;  // ascending
};

/// A and x_true are standard normal, noise is N(0, sigma^2); outlier rows are
/// drawn uniformly without replacement and receive a random-sign gross error.
RegressionInstance generate_regression(const RegressionSpec& spec);

}  // namespace loire::bench
