#include "loire/bench/report.hpp"

#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "loire/bernoulli.hpp"
#include "loire/io/number.hpp"
#include "loire/rank_factorization.hpp"

namespace loire::bench {

using io::format_double;

std::string to_csv_row(const BenchmarkReport& r) {
  if (r.method.find_first_of(",\"\n\r") != std::string::npos) {
    throw std::invalid_argument("method name may not contain CSV delimiters");
  }
  std::string out = r.method;
  for (const std::string& field :
       {std::to_string(r.spec.n), std::to_string(r.spec.seed), format_double(r.lambda),
        format_double(r.tol), std::to_string(r.iterations), format_double(r.metrics.dr),
        format_double(r.metrics.pre), format_double(r.metrics.f), format_double(r.wall_time_s)}) {
    out += ',';
    out += field;
  }
  return out;
}

BenchmarkReport parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (fields.size() != 10) {
    throw std::invalid_argument("report row has " + std::to_string(fields.size()) +
                                " fields, expected 10");
  }
  BenchmarkReport r;
  r.method = fields[0];
  r.spec.n = io::parse_int(fields[1]);
  r.spec.seed = io::parse_uint(fields[2]);
  r.lambda = io::parse_double(fields[3]);
  r.tol = io::parse_double(fields[4]);
  r.iterations = io::parse_int(fields[5]);
  r.metrics.dr = io::parse_double(fields[6]);
  r.metrics.pre = io::parse_double(fields[7]);
  r.metrics.f = io::parse_double(fields[8]);
  r.wall_time_s = io::parse_double(fields[9]);
  return r;
}

void write_report_csv(std::ostream& out, const std::vector<BenchmarkReport>& rows) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : rows) out << to_csv_row(r) << '\n';
}

std::vector<BenchmarkReport> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || io::trim(line) != kReportCsvHeader) {
    throw std::invalid_argument("report is missing the expected header");
  }
  std::vector<BenchmarkReport> rows;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    rows.push_back(parse_csv_row(std::string(io::trim(line))));
  }
  return rows;
}

void to_json(nlohmann::json& j, const BenchmarkReport& r) {
  j = nlohmann::json{
      {"method", r.method},
      {"spec",
       {{"N", r.spec.n},
        {"rank_frac", r.spec.rank_frac},
        {"rank", r.spec.rank()},
        {"dense_noise_scale", r.spec.dense_noise_scale},
        {"spike_amplitude", r.spec.spike_amplitude},
        {"spike_density", r.spec.spike_density},
        {"seed", r.spec.seed},
        {"symmetric", r.spec.symmetric},
        {"gaussian_noise", r.spec.gaussian_noise}}},
      {"metrics",
       {{"tp", r.metrics.tp},
        {"fn", r.metrics.fn},
        {"fp", r.metrics.fp},
        {"DR", r.metrics.dr},
        {"Pre", r.metrics.pre},
        {"F", r.metrics.f}}},
      {"lambda", r.lambda},
      {"tol", r.tol},
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"wall_time_s", r.wall_time_s}};
}

void from_json(const nlohmann::json& j, BenchmarkReport& r) {
  j.at("method").get_to(r.method);
  const auto& s = j.at("spec");
  s.at("N").get_to(r.spec.n);
  s.at("rank_frac").get_to(r.spec.rank_frac);
  s.at("dense_noise_scale").get_to(r.spec.dense_noise_scale);
  s.at("spike_amplitude").get_to(r.spec.spike_amplitude);
  s.at("spike_density").get_to(r.spec.spike_density);
  s.at("seed").get_to(r.spec.seed);
  s.at("symmetric").get_to(r.spec.symmetric);
  s.at("gaussian_noise").get_to(r.spec.gaussian_noise);
  const auto& m = j.at("metrics");
  m.at("tp").get_to(r.metrics.tp);
  m.at("fn").get_to(r.metrics.fn);
  m.at("fp").get_to(r.metrics.fp);
  m.at("DR").get_to(r.metrics.dr);
  m.at("Pre").get_to(r.metrics.pre);
  m.at("F").get_to(r.metrics.f);
  j.at("lambda").get_to(r.lambda);
  j.at("tol").get_to(r.tol);
  j.at("iterations").get_to(r.iterations);
  j.at("converged").get_to(r.converged);
  j.at("wall_time_s").get_to(r.wall_time_s);
}

BenchmarkReport run_rrf_benchmark(const SimSpec& spec, const RrfRunParams& params) {
  const SimInstance inst = generate_sim(spec);
  const double lambda =
      params.lambda ? *params.lambda : default_matrix_lambda(inst.y, params.lambda_scale);
  auto cfg = FactorizationConfig<double>::with_defaults(spec.rank(), lambda, inst.y);
  if (params.tol) cfg.tol = *params.tol;
  cfg.max_iter = params.max_iter;

  const auto start = std::chrono::steady_clock::now();
  const auto sol = rrf_solve(inst.y, cfg);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  const double zero_tol = params.zero_tol ? *params.zero_tol : default_zero_tol(inst.y.reshaped());
  BenchmarkReport r;
  r.method = "rrf";
  r.spec = spec;
  r.metrics = compute_metrics(support_positions(sol.b, zero_tol), inst.true_support,
                              spec.n * spec.n);
  r.wall_time_s = params.record_time ? elapsed.count() : 0.0;
  r.lambda = lambda;
  r.tol = cfg.tol;
  r.iterations = sol.iterations;
  r.converged = sol.converged;
  return r;
}

}  // namespace loire::bench
