#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "loire/core.hpp"

namespace loire::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kRuntimeError = 2 };

struct RegressOptions {
  std::filesystem::path csv;
  std::string target;
  bool intercept = false;
  std::vector<std::string> methods{"loire", "appbem", "ols"};
  std::optional<double> lambda;
  std::optional<double> tol;
  Index max_iter = 1000;
  std::optional<double> zero_tol;
  std::optional<double> radius;        // oracle t
  std::optional<Index> max_support;    // oracle enumeration cap
  std::filesystem::path out_dir = ".";
  bool record_time = true;
};

struct SimulateOptions {
  std::vector<Index> n{100, 200, 400};
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> methods{"rrf"};
  double rank_frac = 0.05;
  std::optional<Index> rank;
  double density = 0.05;
  double amplitude = 10.0;
  double noise = 2.0;
  bool gaussian_noise = false;
  std::optional<double> lambda;
  double lambda_scale = 1.0;
  std::optional<double> tol;
  Index max_iter = 500;
  std::optional<double> zero_tol;
  std::filesystem::path out_dir = ".";
  bool record_time = true;
};

struct BgmodelOptions {
  std::vector<std::string> frames;  // paths or file-name patterns
  Index rank = 1;
  std::optional<double> lambda;
  double lambda_scale = 1.0;
  std::optional<double> tol;
  Index max_iter = 500;
  std::optional<double> zero_tol;
  std::filesystem::path out_dir = ".";
  bool record_time = true;
};

/// CLI heuristic: 1 / median |y - A x_ols|, clamped to [1e-6, 1e6].
double heuristic_lambda(const DenseMatrix<double>& a, const DenseVector<double>& y);

/// Value mapped to 255 when rendering |B|: the 99th percentile of |B|, or
/// its maximum when that percentile is zero.
double foreground_scale(const DenseMatrix<double>& b);

// Each command validates its options, writes its artifacts under out_dir and
// returns an ExitCode. Diagnostics go to `err`, a short summary to `out`.
int cmd_regress(const RegressOptions& opts, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_bgmodel(const BgmodelOptions& opts, std::ostream& out, std::ostream& err);
int cmd_version(bool json, std::ostream& out);

/// Parses argv and dispatches to a command.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace loire::cli
