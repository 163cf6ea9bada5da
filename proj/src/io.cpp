#include "vibrow/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "vibrow/errors.hpp"

namespace vibrow {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "' (check the 'out' directory)");
  return out;
}

std::vector<std::string> split_row(const std::string& line, std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw std::invalid_argument("csv line " + std::to_string(lineno) + ": unterminated quote");
  cells.push_back(std::move(cur));
  return cells;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

void Table::add(std::string name, std::vector<double> values) {
  if (!cols.empty() && values.size() != rows()) throw std::invalid_argument("Table: column '" + name + "' has wrong length");
  names.push_back(std::move(name));
  cols.push_back(std::move(values));
}

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return cols[i];
  throw std::invalid_argument("unknown column '" + name + "'");
}

Table to_table(const MetricSeries& s) {
  Table t;
  for (const auto& name : MetricSeries::columns()) t.add(name, s.column(name));
  return t;
}

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_csv(const std::filesystem::path& path, const Table& t) {
  for (std::size_t c = 0; c < t.cols.size(); ++c)
    for (std::size_t r = 0; r < t.cols[c].size(); ++r)
      if (!std::isfinite(t.cols[c][r]))
        throw NumericalError("non-finite value in column '" + t.names[c] + "' row " + std::to_string(r));
  std::string text;
  for (std::size_t c = 0; c < t.names.size(); ++c) text += (c ? "," : "") + quote(t.names[c]);
  text += '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols.size(); ++c) {
      if (c) text += ',';
      text += format_double(t.cols[c][r]);
    }
    text += '\n';
  }
  auto out = open_out(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  Table t;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line, lineno);
    if (t.names.empty()) {
      t.names = std::move(cells);
      t.cols.resize(t.names.size());
      continue;
    }
    if (cells.size() != t.names.size())
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(t.names.size()) + " fields");
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const char* b = cells[c].data();
      const char* e = b + cells[c].size();
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e)
        throw std::invalid_argument("csv line " + std::to_string(lineno) + ": '" + cells[c] + "' is not a number");
      t.cols[c].push_back(v);
    }
  }
  if (t.names.empty()) throw std::invalid_argument("'" + path.string() + "' is empty");
  return t;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace vibrow
