#include "tmvn/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool try_parse(const std::string& raw, double& value) {
  std::string f = raw;
  std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
  if (f == "inf" || f == "+inf" || f == "infinity" || f == "+infinity") {
    value = kInf;
    return true;
  }
  if (f == "-inf" || f == "-infinity") {
    value = -kInf;
    return true;
  }
  if (f.empty()) return false;
  const char* begin = f.data();
  if (*begin == '+') ++begin;
  const char* end = f.data() + f.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

double parse_number(const std::string& field) {
  double v;
  if (!try_parse(trim(field), v)) throw InvalidArgument("cannot parse number '" + field + "'");
  return v;
}

CsvTable read_csv_table(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    std::vector<double> row(fields.size());
    bool ok = true;
    for (std::size_t i = 0; i < fields.size() && ok; ++i) ok = try_parse(fields[i], row[i]);
    if (!ok) {
      if (first) {
        table.header = fields;
        first = false;
        continue;
      }
      throw InvalidArgument(source + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    first = false;
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_csv_table(in, path);
}

Matrix read_matrix_csv(const std::string& path) {
  const CsvTable t = read_csv_table_file(path);
  if (t.rows.empty()) throw InvalidArgument("'" + path + "' holds no data");
  const std::size_t cols = t.rows.front().size();
  Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != cols) throw InvalidArgument("'" + path + "' has ragged rows");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = t.rows[i][j];
    }
  }
  return m;
}

Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.rows() != 1 && m.cols() != 1) {
    throw InvalidArgument("'" + path + "' must hold a single row or column");
  }
  return m.reshaped();
}

Vector parse_vector_list(const std::string& text) {
  const auto fields = split(text);
  Vector v(static_cast<Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) v[static_cast<Index>(i)] = parse_number(fields[i]);
  return v;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace tmvn
