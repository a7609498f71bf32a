#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loire/bench/metrics.hpp"
#include "loire/bench/simulation.hpp"

namespace loire::bench {

struct BenchmarkReport {
  std::string method;
  SimSpec spec;
  DetectionMetrics metrics;
  double wall_time_s = 0.0;
  double lambda = 0.0;
  double tol = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// method,N,seed,lambda,tol,iterations,DR,Pre,F,wall_time_s
inline constexpr const char* kReportCsvHeader =
    "method,N,seed,lambda,tol,iterations,DR,Pre,F,wall_time_s";

std::string to_csv_row(const BenchmarkReport& r);

/// Inverse of to_csv_row for the fields the CSV schema carries; every other
/// field keeps its default.
BenchmarkReport parse_csv_row(const std::string& line);

void write_report_csv(std::ostream& out, const std::vector<BenchmarkReport>& rows);
std::vector<BenchmarkReport> read_report_csv(std::istream& in);

void to_json(nlohmann::json& j, const BenchmarkReport& r);
void from_json(const nlohmann::json& j, BenchmarkReport& r);

struct RrfRunParams {
  std::optional<double> lambda;  // absolute lambda; overrides lambda_scale
  double lambda_scale = 1.0;     // multiplier on the default matrix lambda
  std::optional<double> tol;
  Index max_iter = 500;
  std::optional<double> zero_tol;
  bool record_time = true;  // when false, wall_time_s is reported as 0
};

/// generate_sim -> rrf_solve (rank = spec.rank()) -> compute_metrics.
BenchmarkReport run_rrf_benchmark(const SimSpec& spec, const RrfRunParams& params);

}  // namespace loire::bench
