#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "spmvopt/csr_matrix.hpp"

namespace spmvopt {

enum class GeneratorKind { Banded, UniformRandom, PowerLawRows, BlockDense };

/// Synthetic matrix recipe. Each kind is shaped to stress one bottleneck:
/// banded (bandwidth), uniform-random (latency), power-law-rows (imbalance),
/// block-dense (computation).
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::UniformRandom;
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::size_t target_nnz = 0;
  std::uint64_t seed = 0;
  /// Banded: number of diagonals (odd; |col-row| <= bandwidth/2).
  std::size_t bandwidth = 3;
  /// Power-law-rows: row length of rank r is proportional to r^-exponent.
  double exponent = 2.0;
  /// Block-dense: edge of the square dense blocks.
  std::size_t block_size = 4;
};

class InfeasibleSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic in spec; throws InfeasibleSpec when target_nnz exceeds the
/// capacity of the kind's structure.
CsrMatrix generate(const GeneratorSpec& spec);

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& name);

/// Parses "kind,rows,cols,nnz,seed[,extra]" (the part after "gen:"). The
/// optional extra is the bandwidth, exponent or block size of the kind.
GeneratorSpec parse_generator_spec(const std::string& text);
std::string format_generator_spec(const GeneratorSpec& spec);

}  // namespace spmvopt
