#include "loire/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "loire/io/number.hpp"

namespace loire::io {

DataError::DataError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      for (const auto& name : fields) {
        if (name.empty()) throw DataError("empty column name in header", line_no);
      }
      table.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw DataError("expected " + std::to_string(table.columns.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      try {
        v = parse_double(fields[c]);
      } catch (const std::invalid_argument&) {
        throw DataError("column '" + table.columns[c] + "': not a number: '" + fields[c] + "'",
                        line_no);
      }
      if (!std::isfinite(v)) {
        throw DataError("column '" + table.columns[c] + "': non-finite value", line_no);
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError("missing header row");
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

RegressionData to_regression(const CsvTable& table, const std::string& target, bool intercept) {
  const auto it = std::find(table.columns.begin(), table.columns.end(), target);
  if (it == table.columns.end()) throw DataError("no column named '" + target + "'");
  const auto target_col = static_cast<Index>(it - table.columns.begin());
  if (table.values.rows() == 0) throw DataError("table has no data rows");

  RegressionData out;
  std::vector<Index> cols;
  for (Index c = 0; c < static_cast<Index>(table.columns.size()); ++c) {
    if (c == target_col) continue;
    cols.push_back(c);
    out.predictors.push_back(table.columns[static_cast<std::size_t>(c)]);
  }
  const Index p = static_cast<Index>(cols.size()) + (intercept ? 1 : 0);
  if (p == 0) throw DataError("no predictor columns (use --intercept for a location model)");
  out.a.resize(table.values.rows(), p);
  if (!cols.empty()) out.a.leftCols(static_cast<Index>(cols.size())) = table.values(Eigen::all, cols);
  if (intercept) {
    out.a.col(p - 1).setOnes();
    out.predictors.emplace_back("(intercept)");
  }
  out.y = table.values.col(target_col);
  return out;
}

}  // namespace loire::io
