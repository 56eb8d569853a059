#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

struct NamedMatrix {
  std::string id;
  CsrMatrix matrix;
};

/// "gen:kind,rows,cols,nnz,seed[,extra]" or a Matrix Market path.
NamedMatrix load_matrix(const std::string& source);

/// Expands a corpus argument into matrix sources:
///   a directory          every *.mtx inside, sorted by name
///   a file               one source per line ('#' comments, blank lines skipped;
///                        relative paths are resolved against the file's directory)
///   "suite:N[,seed]"     N generated matrices cycling through all generator kinds
///   anything else        sources separated by ';'
std::vector<std::string> expand_corpus(const std::string& corpus);

/// Generator sources for a mixed corpus of `count` matrices with at most
/// `max_rows` rows.
std::vector<std::string> generated_suite(std::size_t count, std::uint64_t seed, std::size_t max_rows = 20000);

}  // namespace spmvopt
