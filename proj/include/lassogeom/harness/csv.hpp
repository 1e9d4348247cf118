#pragma once

// Plain numeric CSV for matrices and vectors: one row per line, comma
// separated, `#` comment lines skipped. A vector may be a single column or a
// single row.

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lassogeom/errors.hpp"
#include "lassogeom/harness/format.hpp"
#include "lassogeom/model.hpp"

namespace lassogeom::harness {

inline Matrix read_matrix_csv(std::istream& in, const std::string& name = "matrix") {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      const std::string v = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      double x = 0.0;
      if (!parse_double(v, x))
        throw InvalidArgument(name + " line " + std::to_string(lineno) + ": not a number '" + v + "'");
      row.push_back(x);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument(name + " line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw InvalidArgument(name + ": empty");
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_matrix_csv(in, path);
}

inline Vector read_vector_csv(const std::string& path) {
  const Matrix M = read_matrix_csv(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw InvalidArgument(path + ": expected a single row or column");
}

inline void write_matrix_csv(std::ostream& os, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? "," : "") << fmt_double(M(i, j));
    os << '\n';
  }
}

/// One value per line.
inline void write_vector_csv(std::ostream& os, const Vector& v) { write_matrix_csv(os, v); }

}  // namespace lassogeom::harness
