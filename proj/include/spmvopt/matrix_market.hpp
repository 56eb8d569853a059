#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads a coordinate Matrix Market file (real, integer or pattern; general or
/// symmetric). Symmetric input is expanded to full storage, duplicate
/// coordinates are summed and pattern entries get value 1.0.
CsrMatrix read_matrix_market(const std::filesystem::path& path);
CsrMatrix read_matrix_market(std::istream& in);

/// Writes "coordinate real general" with 17 significant digits, so reading the
/// file back reproduces the matrix bit for bit.
void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path);
void write_matrix_market(const CsrMatrix& m, std::ostream& out);

}  // namespace spmvopt
