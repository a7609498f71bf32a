#include "loire/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "loire/bench/baselines.hpp"
#include "loire/bench/report.hpp"
#include "loire/bernoulli.hpp"
#include "loire/io/csv.hpp"
#include "loire/io/pgm.hpp"
#include "loire/loire.hpp"
#include "loire/rank_factorization.hpp"

namespace loire::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void check_positive(const std::optional<double>& v, const char* flag) {
  if (v) require(*v > 0 && std::isfinite(*v), std::string(flag) + " must be finite and > 0");
}

void check_nonnegative(const std::optional<double>& v, const char* flag) {
  if (v) require(*v >= 0 && std::isfinite(*v), std::string(flag) + " must be finite and >= 0");
}

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

json to_array(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json support_rows(const SupportSet& s) {
  // Reported 1-based, matching data-row numbering in the input file.
  json out = json::array();
  for (Index i : s.indices()) out.push_back(i + 1);
  return out;
}

json solution_entry(const std::string& method, const Vector& x, const Vector& b,
                    const SupportSet& support, const std::vector<double>& trace, Index iterations,
                    bool converged, double seconds) {
  return json{{"method", method},
              {"x", to_array(x)},
              {"b", to_array(b)},
              {"support", support_rows(support)},
              {"objective_trace", trace},
              {"iterations", iterations},
              {"converged", converged},
              {"wall_time_s", seconds}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::DataError("cannot write " + path.string());
  out << text;
  if (!out) throw io::DataError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string frame_name(const char* prefix, Index j) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04ld.pgm", prefix, static_cast<long>(j));
  return buf;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

double heuristic_lambda(const Matrix& a, const Vector& y) {
  const Vector r = (y - a * least_squares_solve(a, y)).cwiseAbs();
  std::vector<double> v(r.data(), r.data() + r.size());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) med = 0.5 * (med + *std::max_element(v.begin(), mid));
  const double lambda = med > 0 ? 1.0 / med : 1e6;
  return std::clamp(lambda, 1e-6, 1e6);
}

double foreground_scale(const Matrix& b) {
  std::vector<double> mags(static_cast<std::size_t>(b.size()));
  for (Index k = 0; k < b.size(); ++k) mags[static_cast<std::size_t>(k)] = std::abs(b(k));
  if (mags.empty()) return 0.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(mags.size()))) - 1;
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(rank), mags.end());
  const double p99 = mags[rank];
  if (p99 > 0) return p99;
  return *std::max_element(mags.begin(), mags.end());
}

int cmd_regress(const RegressOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    static const std::set<std::string> known{"loire", "appbem", "ols", "lad", "oracle"};
    require(!opts.methods.empty(), "--method needs at least one method");
    for (const auto& m : opts.methods) {
      require(known.count(m) > 0, "unknown method '" + m + "' (loire, appbem, ols, lad, oracle)");
    }
    require(!opts.target.empty(), "--target is required");
    check_positive(opts.lambda, "--lambda");
    check_positive(opts.tol, "--tol");
    check_nonnegative(opts.zero_tol, "--zero-tol");
    check_nonnegative(opts.radius, "--radius");
    require(opts.max_iter >= 1, "--max-iter must be >= 1");
    if (opts.max_support) require(*opts.max_support >= 0, "--max-support must be >= 0");

    const auto data = io::to_regression(io::read_csv(opts.csv), opts.target, opts.intercept);
    const Matrix& a = data.a;
    const Vector& y = data.y;
    const double lambda = opts.lambda ? *opts.lambda : heuristic_lambda(a, y);
    auto cfg = LoireConfig<double>::with_defaults(lambda, y);
    if (opts.tol) cfg.tol = *opts.tol;
    cfg.max_iter = opts.max_iter;
    const double zero_tol = opts.zero_tol ? *opts.zero_tol : default_zero_tol(y);
    if (opts.max_support) {
      require(*opts.max_support <= a.rows(), "--max-support exceeds the number of rows");
    }

    json solutions = json::array();
    std::optional<BemSolution<double>> bem;
    auto run_bem = [&] {
      if (!bem) bem = app_bem(a, y, cfg, zero_tol);
      return *bem;
    };

    for (const auto& method : opts.methods) {
      Stopwatch clock(opts.record_time);
      if (method == "loire") {
        const auto sol = loire_solve(a, y, cfg);
        solutions.push_back(solution_entry(method, sol.x, sol.b, detect_support(sol, zero_tol),
                                           sol.objective_trace, sol.iterations, sol.converged,
                                           clock.seconds()));
      } else if (method == "appbem") {
        const auto sol = run_bem();
        solutions.push_back(solution_entry(method, sol.x, sol.b, sol.support,
                                           sol.loire->objective_trace, sol.loire->iterations,
                                           sol.loire->converged, clock.seconds()));
      } else if (method == "ols") {
        const Vector x = bench::baseline_ols(a, y);
        solutions.push_back(solution_entry(method, x, Vector::Zero(y.size()), {}, {}, 0, true,
                                           clock.seconds()));
      } else if (method == "lad") {
        const auto sol = bench::baseline_lad(a, y);
        solutions.push_back(solution_entry(method, sol.x, Vector::Zero(y.size()), {}, {},
                                           sol.iterations, sol.converged, clock.seconds()));
      } else {
        OracleConfig<double> ocfg;
        ocfg.max_support = opts.max_support ? *opts.max_support : a.rows();
        if (oracle_candidate_count(a.rows(), ocfg.max_support) > kOracleEnumerationLimit) {
          throw InfeasibleError("oracle refused: " + std::to_string(a.rows()) +
                                " rows exceed the enumeration guard; lower --max-support");
        }
        if (opts.radius) {
          ocfg.t = *opts.radius;
        } else {
          // Default radius: the clean-row residual of the approximate estimate.
          const auto ref = run_bem();
          const auto rows = ref.support.complement(a.rows());
          ocfg.t = (y(rows) - a(rows, Eigen::all) * ref.x).norm();
        }
        const auto sol = bernoulli_oracle(a, y, ocfg);
        solutions.push_back(solution_entry(method, sol.x, sol.b, sol.support, {}, 0, true,
                                           clock.seconds()));
      }
      const auto& last = solutions.back();
      out << method << ": x = " << last["x"].dump() << ", support = " << last["support"].dump()
          << '\n';
    }

    ensure_dir(opts.out_dir);
    write_text(opts.out_dir / "solution.json", solutions.dump(2) + "\n");
    out << "lambda = " << lambda << "; wrote " << (opts.out_dir / "solution.json").string() << '\n';
    return int{kOk};
  });
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(!opts.n.empty(), "--n needs at least one dimension");
    for (Index n : opts.n) require(n >= 1, "--n values must be >= 1");
    require(!opts.seeds.empty(), "--seed needs at least one value");
    for (const auto& m : opts.methods) require(m == "rrf", "unknown method '" + m + "' (rrf)");
    require(opts.rank_frac > 0 && opts.rank_frac <= 1, "--rank-frac must lie in (0, 1]");
    require(opts.density >= 0 && opts.density <= 1, "--density must lie in [0, 1]");
    require(opts.amplitude >= 0 && std::isfinite(opts.amplitude), "--amplitude must be >= 0");
    require(opts.noise >= 0 && std::isfinite(opts.noise), "--noise must be >= 0");
    require(opts.lambda_scale > 0 && std::isfinite(opts.lambda_scale), "--lambda-scale must be > 0");
    check_positive(opts.lambda, "--lambda");
    check_positive(opts.tol, "--tol");
    check_nonnegative(opts.zero_tol, "--zero-tol");
    require(opts.max_iter >= 1, "--max-iter must be >= 1");
    if (opts.rank) {
      for (Index n : opts.n) require(*opts.rank >= 1 && *opts.rank <= n, "--rank must lie in [1, N]");
    }

    std::vector<bench::BenchmarkReport> rows;
    for (Index n : opts.n) {
      for (std::uint64_t seed : opts.seeds) {
        for (const auto& method : opts.methods) {
          bench::SimSpec spec;
          spec.n = n;
          spec.rank_frac = opts.rank ? static_cast<double>(*opts.rank) / static_cast<double>(n)
                                     : opts.rank_frac;
          spec.dense_noise_scale = opts.noise;
          spec.spike_amplitude = opts.amplitude;
          spec.spike_density = opts.density;
          spec.seed = seed;
          spec.gaussian_noise = opts.gaussian_noise;
          bench::RrfRunParams params;
          params.lambda = opts.lambda;
          params.lambda_scale = opts.lambda_scale;
          params.tol = opts.tol;
          params.max_iter = opts.max_iter;
          params.zero_tol = opts.zero_tol;
          params.record_time = opts.record_time;
          auto report = bench::run_rrf_benchmark(spec, params);
          report.method = method;
          out << bench::to_csv_row(report) << '\n';
          rows.push_back(std::move(report));
        }
      }
    }

    ensure_dir(opts.out_dir);
    std::ostringstream csv;
    bench::write_report_csv(csv, rows);
    write_text(opts.out_dir / "report.csv", csv.str());
    write_text(opts.out_dir / "report.json", json(rows).dump(2) + "\n");
    return int{kOk};
  });
}

int cmd_bgmodel(const BgmodelOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(!opts.frames.empty(), "no input frames given");
    require(opts.rank >= 1, "--rank must be >= 1");
    check_positive(opts.lambda, "--lambda");
    require(opts.lambda_scale > 0 && std::isfinite(opts.lambda_scale), "--lambda-scale must be > 0");
    check_positive(opts.tol, "--tol");
    check_nonnegative(opts.zero_tol, "--zero-tol");
    require(opts.max_iter >= 1, "--max-iter must be >= 1");

    const auto stack = io::load_frames(io::expand_frame_patterns(opts.frames));
    const Matrix& y = stack.matrix;
    require(opts.rank <= std::min(y.rows(), y.cols()),
            "--rank must not exceed min(pixels, frames) = " +
                std::to_string(std::min(y.rows(), y.cols())));
    const double lambda = opts.lambda ? *opts.lambda : default_matrix_lambda(y, opts.lambda_scale);
    auto cfg = FactorizationConfig<double>::with_defaults(opts.rank, lambda, y);
    if (opts.tol) cfg.tol = *opts.tol;
    cfg.max_iter = opts.max_iter;
    const double zero_tol = opts.zero_tol ? *opts.zero_tol : default_zero_tol(y.reshaped());

    Stopwatch clock(opts.record_time);
    const auto sol = rrf_solve(y, cfg);
    const double seconds = clock.seconds();

    ensure_dir(opts.out_dir);
    const Matrix background = sol.low_rank();
    const double scale = foreground_scale(sol.b);
    const Matrix foreground =
        scale > 0 ? Matrix(sol.b.cwiseAbs() * (255.0 / scale)) : Matrix::Zero(y.rows(), y.cols());
    const Matrix mask = (sol.b.array().abs() > zero_tol).cast<double>() * 255.0;
    for (Index j = 0; j < y.cols(); ++j) {
      io::write_pgm(opts.out_dir / frame_name("background", j),
                    io::column_to_image(background.col(j), stack.width, stack.height));
      io::write_pgm(opts.out_dir / frame_name("foreground", j),
                    io::column_to_image(foreground.col(j), stack.width, stack.height));
      io::write_pgm(opts.out_dir / frame_name("mask", j),
                    io::column_to_image(mask.col(j), stack.width, stack.height));
    }
    const json timing{{"frames", y.cols()},
                      {"width", stack.width},
                      {"height", stack.height},
                      {"rank", opts.rank},
                      {"lambda", lambda},
                      {"tol", cfg.tol},
                      {"iterations", sol.iterations},
                      {"converged", sol.converged},
                      {"wall_time_s", seconds}};
    write_text(opts.out_dir / "timing.json", timing.dump(2) + "\n");
    out << "frames " << y.cols() << " (" << stack.width << "x" << stack.height << "), "
        << sol.iterations << " iterations, converged = " << (sol.converged ? "yes" : "no")
        << '\n';
    return int{kOk};
  });
}

int cmd_version(bool as_json, std::ostream& out) {
  if (as_json) {
    out << json{{"name", "loire"}, {"version", kVersion}}.dump() << '\n';
  } else {
    out << "loire " << kVersion << '\n';
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust regression, outlier isolation and robust rank factorization"};
  app.name("loire");
  app.require_subcommand(0, 1);

  RegressOptions reg;
  SimulateOptions sim;
  BgmodelOptions bg;
  bool version_json = false;
  bool no_timing = false;

  // Optional-valued flags are captured as plain values and checked with count().
  double reg_lambda = 0, reg_tol = 0, reg_zero_tol = 0, reg_radius = 0;
  Index reg_max_support = 0;
  double sim_lambda = 0, sim_tol = 0, sim_zero_tol = 0;
  Index sim_rank = 0;
  double bg_lambda = 0, bg_tol = 0, bg_zero_tol = 0;

  auto* regress = app.add_subcommand("regress", "Robust linear regression on a CSV table");
  regress->add_option("csv", reg.csv, "Input CSV with a header row")->required();
  regress->add_option("--target", reg.target, "Response column")->required();
  regress->add_flag("--intercept", reg.intercept, "Append a column of ones");
  regress->add_option("--method", reg.methods, "loire, appbem, ols, lad, oracle")->delimiter(',');
  auto* reg_lambda_opt = regress->add_option("--lambda", reg_lambda, "Penalty weight");
  auto* reg_tol_opt = regress->add_option("--tol", reg_tol, "Convergence tolerance");
  regress->add_option("--max-iter", reg.max_iter, "Iteration cap");
  auto* reg_zero_opt = regress->add_option("--zero-tol", reg_zero_tol, "Outlier detection tolerance");
  auto* reg_radius_opt = regress->add_option("--radius", reg_radius, "Oracle residual radius t");
  auto* reg_support_opt =
      regress->add_option("--max-support", reg_max_support, "Oracle support size cap");
  regress->add_option("--out", reg.out_dir, "Output directory");
  regress->add_flag("--no-timing", no_timing, "Report wall times as 0");

  auto* simulate = app.add_subcommand("simulate", "Low-rank plus sparse recovery benchmark");
  simulate->add_option("--n", sim.n, "Matrix dimensions")->delimiter(',');
  simulate->add_option("--seed", sim.seeds, "Seeds")->delimiter(',');
  simulate->add_option("--method", sim.methods, "rrf")->delimiter(',');
  simulate->add_option("--rank-frac", sim.rank_frac, "Rank as a fraction of N");
  auto* sim_rank_opt = simulate->add_option("--rank", sim_rank, "Absolute rank (overrides --rank-frac)");
  simulate->add_option("--density", sim.density, "Spike density");
  simulate->add_option("--amplitude", sim.amplitude, "Spike amplitude");
  simulate->add_option("--noise", sim.noise, "Dense noise scale");
  simulate->add_flag("--gaussian-noise", sim.gaussian_noise, "Gaussian instead of uniform noise");
  auto* sim_lambda_opt = simulate->add_option("--lambda", sim_lambda, "Penalty weight");
  simulate->add_option("--lambda-scale", sim.lambda_scale, "Multiplier on the default lambda");
  auto* sim_tol_opt = simulate->add_option("--tol", sim_tol, "Convergence tolerance");
  simulate->add_option("--max-iter", sim.max_iter, "Iteration cap");
  auto* sim_zero_opt = simulate->add_option("--zero-tol", sim_zero_tol, "Detection tolerance");
  simulate->add_option("--out", sim.out_dir, "Output directory");
  simulate->add_flag("--no-timing", no_timing, "Report wall times as 0");

  auto* bgmodel = app.add_subcommand("bgmodel", "Background modeling on a PGM frame sequence");
  bgmodel->add_option("frames", bg.frames, "Frame files or patterns")->required();
  bgmodel->add_option("--rank", bg.rank, "Background rank");
  auto* bg_lambda_opt = bgmodel->add_option("--lambda", bg_lambda, "Penalty weight");
  bgmodel->add_option("--lambda-scale", bg.lambda_scale, "Multiplier on the default lambda");
  auto* bg_tol_opt = bgmodel->add_option("--tol", bg_tol, "Convergence tolerance");
  bgmodel->add_option("--max-iter", bg.max_iter, "Iteration cap");
  auto* bg_zero_opt = bgmodel->add_option("--zero-tol", bg_zero_tol, "Foreground tolerance");
  bgmodel->add_option("--out", bg.out_dir, "Output directory");
  bgmodel->add_flag("--no-timing", no_timing, "Report wall times as 0");

  auto* version = app.add_subcommand("version", "Print the version");
  version->add_flag("--json", version_json, "Machine-readable output");
  auto* help = app.add_subcommand("help", "Show usage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  if (regress->parsed()) {
    if (reg_lambda_opt->count()) reg.lambda = reg_lambda;
    if (reg_tol_opt->count()) reg.tol = reg_tol;
    if (reg_zero_opt->count()) reg.zero_tol = reg_zero_tol;
    if (reg_radius_opt->count()) reg.radius = reg_radius;
    if (reg_support_opt->count()) reg.max_support = reg_max_support;
    reg.record_time = !no_timing;
    return cmd_regress(reg, out, err);
  }
  if (simulate->parsed()) {
    if (sim_lambda_opt->count()) sim.lambda = sim_lambda;
    if (sim_tol_opt->count()) sim.tol = sim_tol;
    if (sim_zero_opt->count()) sim.zero_tol = sim_zero_tol;
    if (sim_rank_opt->count()) sim.rank = sim_rank;
    sim.record_time = !no_timing;
    return cmd_simulate(sim, out, err);
  }
  if (bgmodel->parsed()) {
    if (bg_lambda_opt->count()) bg.lambda = bg_lambda;
    if (bg_tol_opt->count()) bg.tol = bg_tol;
    if (bg_zero_opt->count()) bg.zero_tol = bg_zero_tol;
    bg.record_time = !no_timing;
    return cmd_bgmodel(bg, out, err);
  }
  if (version->parsed()) return cmd_version(version_json, out);
  if (help->parsed() || argc <= 1) {
    out << app.help();
    return argc <= 1 && !help->parsed() ? kUsageError : kOk;
  }
  return kOk;
}

}  // namespace loire::cli
