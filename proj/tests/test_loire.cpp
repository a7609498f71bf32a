#include <cmath>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "loire/loire.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using loire::LoireConfig;

namespace {

MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d;
  MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = d(rng);
  return m;
}

// min_b |b| + lambda/2 (r - b)^2, evaluated in closed form.
double envelope(double r, double lambda) {
  const double tau = 1 / lambda;
  return std::abs(r) <= tau ? 0.5 * lambda * r * r : std::abs(r) - 0.5 * tau;
}

// Objective of the penalized problem with b eliminated; convex and smooth in x.
double reduced_objective(const MatrixXd& a, const VectorXd& y, const VectorXd& x, double lambda) {
  const VectorXd r = y - a * x;
  double f = 0;
  for (Eigen::Index i = 0; i < r.size(); ++i) f += envelope(r(i), lambda);
  return f;
}

// Nesterov-accelerated gradient descent on the reduced objective; independent
// of the alternating scheme under test.
VectorXd convex_reference(const MatrixXd& a, const VectorXd& y, double lambda, int iters) {
  const double step = 1.0 / (lambda * a.squaredNorm());
  VectorXd x = VectorXd::Zero(a.cols()), prev = x, z = x;
  for (int k = 1; k <= iters; ++k) {
    const VectorXd r = y - a * z;
    VectorXd g(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      g(i) = std::abs(r(i)) <= 1 / lambda ? lambda * r(i) : (r(i) > 0 ? 1.0 : -1.0);
    }
    prev = x;
    x = z + step * (a.transpose() * g);
    z = x + (static_cast<double>(k - 1) / (k + 2)) * (x - prev);
  }
  return x;
}

}  // namespace

TEST(LoireSolve, ExactFitConvergesInOneIteration) {
  const MatrixXd a = MatrixXd::Ones(3, 1);
  const VectorXd y = VectorXd::Constant(3, 2.0);
  const auto sol = loire::loire_solve(a, y, LoireConfig<double>::with_defaults(1.0, y));
  EXPECT_TRUE(sol.converged);
  EXPECT_EQ(sol.iterations, 1);
  EXPECT_NEAR(sol.x(0), 2.0, 1e-14);
  EXPECT_EQ(sol.b, VectorXd::Zero(3));
}

TEST(LoireSolve, SingleGrossOutlierMatchesConvexReference) {
  const MatrixXd a = MatrixXd::Ones(4, 1);
  const VectorXd y{{1, 1, 1, 11}};
  const double lambda = 1.0;
  const auto sol = loire::loire_solve(a, y, LoireConfig<double>::with_defaults(lambda, y));
  ASSERT_TRUE(sol.converged);

  // The reduced objective is convex in x; bisect on the sign of its derivative.
  auto slope = [&](double x) {
    double g = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double r = y(i) - x;
      g -= std::abs(r) <= 1 / lambda ? lambda * r : (r > 0 ? 1.0 : -1.0);
    }
    return g;
  };
  double lo = y.minCoeff(), hi = y.maxCoeff();
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0 ? lo : hi) = mid;
  }
  const double x_ref = 0.5 * (lo + hi);
  EXPECT_NEAR(sol.x(0), x_ref, 1e-8);
  EXPECT_NEAR(sol.x(0), 1.0, 0.5);
  EXPECT_EQ(sol.b(0), 0.0);
  EXPECT_EQ(sol.b(1), 0.0);
  EXPECT_EQ(sol.b(2), 0.0);
  EXPECT_GT(sol.b(3), 0.0);
}

TEST(LoireSolve, DeadZoneAbsorbsAllResiduals) {
  std::mt19937_64 rng(2);
  const MatrixXd a = gaussian(rng, 12, 3);
  const VectorXd y = gaussian(rng, 12, 1);
  const double lambda = 0.5 / y.lpNorm<Eigen::Infinity>();  // 1/lambda = 2 ||y||_inf
  const auto sol = loire::loire_solve(a, y, LoireConfig<double>::with_defaults(lambda, y));
  EXPECT_EQ(sol.b, VectorXd::Zero(12));
  EXPECT_LE((sol.x - loire::least_squares_solve(a, y)).norm(), 1e-12);
}

TEST(LoireSolve, MatchesGenericConvexSolver) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd a = gaussian(rng, 25, 3);
    VectorXd y = a * gaussian(rng, 3, 1) + 0.1 * gaussian(rng, 25, 1);
    y(3) += 8;
    y(17) -= 6;
    const double lambda = 2.0;
    const auto sol = loire::loire_solve(a, y, LoireConfig<double>::with_defaults(lambda, y));
    const VectorXd x_ref = convex_reference(a, y, lambda, 20000);
    EXPECT_NEAR(loire::loire_objective(a, y, sol.x, sol.b, lambda),
                reduced_objective(a, y, x_ref, lambda), 1e-8);
    EXPECT_LE((sol.x - x_ref).norm(), 1e-6);
  }
}

TEST(LoireObjective, Examples) {
  const MatrixXd a = MatrixXd::Ones(2, 1);
  const VectorXd y = VectorXd::Ones(2);
  EXPECT_DOUBLE_EQ(loire::loire_objective(a, y, VectorXd::Zero(1), VectorXd::Zero(2), 2.0), 2.0);

  const VectorXd x{{0.25}};
  const VectorXd b = y - a * x;
  EXPECT_DOUBLE_EQ(loire::loire_objective(a, y, x, b, 3.0), b.lpNorm<1>());
}

TEST(LoireObjective, MatchesNaiveLoops) {
  std::mt19937_64 rng(4);
  const MatrixXd a = gaussian(rng, 9, 4);
  const VectorXd y = gaussian(rng, 9, 1), x = gaussian(rng, 4, 1), b = gaussian(rng, 9, 1);
  const double lambda = 0.7;
  double l1 = 0, sq = 0;
  for (int i = 0; i < 9; ++i) {
    l1 += std::abs(b(i));
    double r = y(i) - b(i);
    for (int j = 0; j < 4; ++j) r -= a(i, j) * x(j);
    sq += r * r;
  }
  EXPECT_NEAR(loire::loire_objective(a, y, x, b, lambda), l1 + lambda / 2 * sq, 1e-12);
  EXPECT_THROW(loire::loire_objective(a, y, VectorXd::Zero(3), b, lambda), loire::DimensionError);
}

TEST(LoireSolver, EveryHalfStepDescends) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd a = gaussian(rng, 30, 4);
    VectorXd y = a * gaussian(rng, 4, 1) + 0.2 * gaussian(rng, 30, 1);
    for (int k = 0; k < 4; ++k) y(static_cast<Eigen::Index>(rng() % 30)) += 10;
    const double lambda = 1.5;
    const loire::LoireSolver<double> solver(a);
    VectorXd b = VectorXd::Zero(30);
    VectorXd x = solver.update_coefficients(y, b);
    for (int k = 0; k < 40; ++k) {
      const double f0 = loire::loire_objective(a, y, x, b, lambda);
      const VectorXd b_next = solver.update_outliers(y, x, lambda);
      const double f1 = loire::loire_objective(a, y, x, b_next, lambda);
      const VectorXd x_next = solver.update_coefficients(y, b_next);
      const double f2 = loire::loire_objective(a, y, x_next, b_next, lambda);
      EXPECT_LE(f1, f0 + 1e-12 * (1 + f0));
      EXPECT_LE(f2, f1 + 1e-12 * (1 + f1));
      x = x_next;
      b = b_next;
    }
  }
}

TEST(LoireSolver, OptimalityCertificates) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index m = 20 + static_cast<Eigen::Index>(rng() % 40);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 8);
    const MatrixXd a = gaussian(rng, m, n);
    VectorXd y = a * gaussian(rng, n, 1) + 0.3 * gaussian(rng, m, 1);
    for (int k = 0; k < 3; ++k) y(static_cast<Eigen::Index>(rng() % m)) += 15;
    const double lambda = 1.0;
    const auto cfg = LoireConfig<double>::with_defaults(lambda, y);
    const auto sol = loire::loire_solve(a, y, cfg);
    ASSERT_TRUE(sol.converged);

    for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
      EXPECT_LE(sol.objective_trace[k], sol.objective_trace[k - 1] + 1e-12);
    }

    const VectorXd e = y - a * sol.x - sol.b;
    EXPECT_LE((a.transpose() * e).lpNorm<Eigen::Infinity>(), 1e-6);
    for (Eigen::Index i = 0; i < m; ++i) {
      EXPECT_LE(std::abs(lambda * e(i)), 1 + 1e-6);
      if (sol.b(i) != 0) {
        EXPECT_NEAR(lambda * e(i), sol.b(i) > 0 ? 1.0 : -1.0, 1e-6);
      }
    }

    const loire::LoireSolver<double> solver(a);
    const VectorXd x2 = solver.update_coefficients(y, sol.b);
    const VectorXd b2 = solver.update_outliers(y, x2, lambda);
    EXPECT_LE((x2 - sol.x).norm(), cfg.tol);
    EXPECT_LE((b2 - sol.b).norm(), cfg.tol);
  }
}

TEST(LoireSolver, RecoversOutlierFreeSystemsExactly) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::Index m = n + 2 + static_cast<Eigen::Index>(rng() % 20);
    const MatrixXd a = gaussian(rng, m, n);
    const VectorXd x_star = gaussian(rng, n, 1);
    const VectorXd y = a * x_star;
    const auto sol = loire::loire_solve(a, y, LoireConfig<double>::with_defaults(1.0, y));
    EXPECT_LE((sol.x - x_star).lpNorm<Eigen::Infinity>(), 1e-8);
    EXPECT_EQ(sol.b, VectorXd::Zero(m));
  }
}

TEST(LoireSolver, IterationCapIsNotAnError) {
  std::mt19937_64 rng(43);
  const MatrixXd a = gaussian(rng, 20, 2);
  VectorXd y = a * gaussian(rng, 2, 1);
  y(0) += 50;
  LoireConfig<double> cfg{0.5, 1e-300, 2};
  const auto sol = loire::loire_solve(a, y, cfg);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 2);
}

TEST(LoireSolver, Errors) {
  const MatrixXd a = MatrixXd::Ones(3, 1);
  EXPECT_THROW(loire::loire_solve(a, VectorXd::Ones(2), LoireConfig<double>{}), loire::DimensionError);
  EXPECT_THROW(loire::loire_solve(a, VectorXd::Ones(3), LoireConfig<double>{0.0, 1e-8, 10}),
               loire::DomainError);
  EXPECT_THROW(loire::loire_solve(a, VectorXd::Ones(3), LoireConfig<double>{1.0, 0.0, 10}),
               loire::DomainError);
  EXPECT_THROW(loire::loire_solve(a, VectorXd::Ones(3), LoireConfig<double>{1.0, 1e-8, 0}),
               loire::DomainError);
}

TEST(LoireSolver, SharedSolverIsThreadSafe) {
  std::mt19937_64 rng(47);
  const MatrixXd a = gaussian(rng, 40, 3);
  std::vector<VectorXd> ys;
  for (int k = 0; k < 4; ++k) {
    VectorXd y = a * gaussian(rng, 3, 1) + 0.1 * gaussian(rng, 40, 1);
    y(k) += 20;
    ys.push_back(y);
  }
  const loire::LoireSolver<double> solver(a);
  std::vector<loire::LoireSolution<double>> sequential, parallel(ys.size());
  for (const auto& y : ys) sequential.push_back(solver.solve(y, LoireConfig<double>::with_defaults(1.0, y)));
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    pool.emplace_back([&, k] { parallel[k] = solver.solve(ys[k], LoireConfig<double>::with_defaults(1.0, ys[k])); });
  }
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < ys.size(); ++k) {
    EXPECT_EQ(parallel[k].x, sequential[k].x);
    EXPECT_EQ(parallel[k].b, sequential[k].b);
  }
}

TEST(LoireSolver, WorksInSinglePrecision) {
  const Eigen::MatrixXf a = Eigen::MatrixXf::Ones(4, 1);
  const Eigen::VectorXf y{{1, 1, 1, 11}};
  const auto sol = loire::loire_solve(a, y, LoireConfig<float>{1.0f, 1e-5f, 1000});
  EXPECT_TRUE(sol.converged);
  EXPECT_GT(sol.b(3), 0.0f);
  EXPECT_NEAR(sol.x(0), 4.0f / 3.0f, 1e-4f);
}
