#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vibrow/config.hpp"
#include "vibrow/metrics.hpp"

namespace vibrow {

// Column-major numeric table with named columns.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }
  void add(std::string name, std::vector<double> values);
  const std::vector<double>& column(const std::string& name) const;
};

Table to_table(const MetricSeries& s);

// Exactly 17 significant digits, %g style.
std::string format_double(double x);

// Header row, comma separated, LF line endings. Non-finite values raise
// NumericalError before anything is written.
void write_csv(const std::filesystem::path& path, const Table& t);
Table read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace vibrow
