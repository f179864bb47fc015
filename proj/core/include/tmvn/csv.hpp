#pragma once

// Plain-text matrix and vector ingestion. Fields are comma separated, an
// optional first header line is skipped when any of its fields fails to
// parse as a number, and inf / -inf / +inf (any case) denote infinities.

#include <iosfwd>
#include <string>
#include <vector>

#include "tmvn/problem.hpp"

namespace tmvn {

/// Parses one numeric field; throws InvalidArgument on garbage.
double parse_number(const std::string& field);

/// Rows of the table as written, header dropped.
struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv_table(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv_table_file(const std::string& path);

/// Rectangular matrix; throws InvalidArgument on ragged rows.
Matrix read_matrix_csv(const std::string& path);

/// A single row or a single column.
Vector read_vector_csv(const std::string& path);

/// "1,2,inf" style inline list.
Vector parse_vector_list(const std::string& text);

void write_matrix_csv(std::ostream& out, const Matrix& m);

}  // namespace tmvn
