#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dantzig_kit/linalg.hpp"

namespace dantzig_kit::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw CsvError(where + ": not a number: '" + std::string(field) + "'");
  return value;
}

}  // namespace detail

// Plain comma-separated numeric rows. Blank lines are ignored; with
// skip_header the first line is dropped unread.
inline Matrix parse_matrix(std::istream& in, const std::string& name, bool skip_header = false) {
  std::string line;
  std::size_t lineno = 0, cols = 0;
  std::vector<double> entries;
  std::size_t rows = 0;
  if (skip_header && std::getline(in, line)) ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    std::size_t count = 0, start = 0;
    for (;;) {
      const auto comma = body.find(',', start);
      entries.push_back(detail::parse_number(body.substr(start, comma - start), where));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols)
      throw CsvError(where + ": expected " + std::to_string(cols) + " fields, found " +
                     std::to_string(count));
    ++rows;
  }
  if (rows == 0) throw CsvError(name + ": no data rows");
  try {
    return Matrix(rows, cols, std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw CsvError(name + ": " + e.what());
  }
}

inline Matrix read_matrix(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open file: " + path);
  return parse_matrix(in, path, skip_header);
}

// A single column, one value per line.
inline Vector read_vector(const std::string& path, bool skip_header = false) {
  const Matrix m = read_matrix(path, skip_header);
  if (m.cols() != 1)
    throw CsvError(path + ": expected a single column, found " + std::to_string(m.cols()));
  return Vector(m.entries().begin(), m.entries().end());
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_matrix(std::ostream& out, const Matrix& m,
                         const std::vector<std::string>& header = {}) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (!header.empty()) out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_number(m(i, j));
    out << '\n';
  }
}

inline void write_matrix(const std::string& path, const Matrix& m,
                         const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write file: " + path);
  write_matrix(out, m, header);
  if (!out) throw CsvError("write failed: " + path);
}

}  // namespace dantzig_kit::csv
