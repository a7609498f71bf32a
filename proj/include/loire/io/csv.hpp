#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loire/core.hpp"

namespace loire::io {

/// Malformed input; `line` is 1-based (0 when not tied to a line).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t line = 0);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Numeric table with a header row. Comma separated, '.' decimal point,
/// blank lines skipped, no quoting.
struct CsvTable {
  std::vector<std::string> columns;
  DenseMatrix<double> values;  // rows x columns
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

struct RegressionData {
  DenseMatrix<double> a;
  DenseVector<double> y;
  std::vector<std::string> predictors;  // column names of a, "(intercept)" last if added
};

/// Splits a table into response `target` and the remaining predictor columns.
RegressionData to_regression(const CsvTable& table, const std::string& target, bool intercept);

}  // namespace loire::io
