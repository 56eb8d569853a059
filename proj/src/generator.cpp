#include "spmvopt/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spmvopt {
namespace {

// Distribution helpers are written out instead of using <random>
// distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Nonzero value in [-1, -0.1] u [0.1, 1].
  double value() {
    double magnitude = 0.1 + 0.9 * unit();
    return (engine_() & 1u) ? magnitude : -magnitude;
  }

 private:
  std::mt19937_64 engine_;
};

/// k distinct integers from [0, n), sorted ascending.
std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k, Rng& rng) {
  std::vector<std::uint64_t> out;
  if (k == 0) return out;
  out.reserve(k);
  if (k * 2 > n) {
    // Selection sampling: a single ordered pass.
    std::uint64_t needed = k;
    for (std::uint64_t i = 0; i < n && needed > 0; ++i) {
      if (rng.below(n - i) < needed) {
        out.push_back(i);
        --needed;
      }
    }
    return out;
  }
  while (out.size() < k) {
    std::size_t missing = k - out.size();
    for (std::size_t t = 0; t < missing; ++t) out.push_back(rng.below(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

struct Coord {
  std::uint64_t row;
  std::uint64_t col;
};

CsrMatrix assemble(std::size_t nrows, std::size_t ncols, std::vector<Coord> coords, Rng& rng) {
  std::sort(coords.begin(), coords.end(),
            [](const Coord& a, const Coord& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.nrows = nrows;
  m.ncols = ncols;
  m.rowptr.assign(nrows + 1, 0);
  m.colind.reserve(coords.size());
  m.values.reserve(coords.size());
  for (const Coord& c : coords) {
    m.colind.push_back(static_cast<index_t>(c.col));
    m.values.push_back(rng.value());
    ++m.rowptr[c.row + 1];
  }
  for (std::size_t i = 0; i < nrows; ++i) m.rowptr[i + 1] += m.rowptr[i];
  return m;
}

CsrMatrix generate_banded(const GeneratorSpec& s, Rng& rng) {
  const std::size_t half = s.bandwidth / 2;
  std::vector<std::pair<std::size_t, std::size_t>> row_span(s.nrows);
  std::uint64_t capacity = 0;
  for (std::size_t i = 0; i < s.nrows; ++i) {
    std::size_t lo = i > half ? i - half : 0;
    std::size_t hi = std::min(s.ncols, i + half + 1);
    if (lo >= hi) lo = hi;
    row_span[i] = {lo, hi};
    capacity += hi - lo;
  }
  if (s.target_nnz > capacity)
    throw InfeasibleSpec("banded: target nnz " + std::to_string(s.target_nnz) + " exceeds band capacity " +
                         std::to_string(capacity));
  std::vector<Coord> coords;
  coords.reserve(s.target_nnz);
  std::uint64_t needed = s.target_nnz;
  std::uint64_t remaining = capacity;
  for (std::size_t i = 0; i < s.nrows && needed > 0; ++i) {
    for (std::size_t c = row_span[i].first; c < row_span[i].second; ++c, --remaining) {
      if (rng.below(remaining) < needed) {
        coords.push_back({i, c});
        if (--needed == 0) break;
      }
    }
  }
  return assemble(s.nrows, s.ncols, std::move(coords), rng);
}

CsrMatrix generate_uniform(const GeneratorSpec& s, Rng& rng) {
  const std::uint64_t cells = static_cast<std::uint64_t>(s.nrows) * s.ncols;
  if (s.target_nnz > cells) throw InfeasibleSpec("uniform-random: target nnz exceeds nrows*ncols");
  std::vector<Coord> coords;
  coords.reserve(s.target_nnz);
  for (std::uint64_t linear : sample_distinct(cells, s.target_nnz, rng))
    coords.push_back({linear / s.ncols, linear % s.ncols});
  return assemble(s.nrows, s.ncols, std::move(coords), rng);
}

/// Row lengths proportional to rank^-exponent, capped at ncols, summing to
/// exactly `target`. Index r holds the length of rank r+1.
std::vector<std::uint64_t> power_law_lengths(std::size_t nrows, std::uint64_t cap, std::uint64_t target,
                                             double exponent) {
  std::vector<double> weight(nrows);
  for (std::size_t r = 0; r < nrows; ++r) weight[r] = std::pow(static_cast<double>(r + 1), -exponent);

  std::vector<std::uint64_t> length(nrows, 0);
  std::vector<bool> capped(nrows, false);
  std::uint64_t remaining = target;
  double scale = 0.0;
  // Water-filling: rows whose share exceeds the cap are pinned at the cap and
  // the rest is redistributed. Weights are decreasing, so capped rows form a prefix.
  for (;;) {
    double active_weight = 0.0;
    for (std::size_t r = 0; r < nrows; ++r)
      if (!capped[r]) active_weight += weight[r];
    if (active_weight == 0.0) break;
    scale = static_cast<double>(remaining) / active_weight;
    bool changed = false;
    for (std::size_t r = 0; r < nrows; ++r) {
      if (!capped[r] && scale * weight[r] >= static_cast<double>(cap)) {
        capped[r] = true;
        length[r] = cap;
        remaining -= cap;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<std::pair<double, std::size_t>> fraction;
  std::uint64_t assigned = 0;
  for (std::size_t r = 0; r < nrows; ++r) {
    if (capped[r]) continue;
    double share = scale * weight[r];
    auto whole = static_cast<std::uint64_t>(std::floor(share));
    whole = std::min(whole, cap);
    length[r] = whole;
    assigned += whole;
    fraction.emplace_back(share - static_cast<double>(whole), r);
  }
  // Largest remainder; ties go to the lower rank.
  std::stable_sort(fraction.begin(), fraction.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::uint64_t leftover = remaining - std::min(remaining, assigned);
  for (std::size_t k = 0; leftover > 0 && k < fraction.size(); ++k) {
    std::size_t r = fraction[k].second;
    if (length[r] < cap) {
      ++length[r];
      --leftover;
    }
  }
  // Rounding slack from floating point: top up from the heaviest uncapped rows.
  for (std::size_t r = 0; leftover > 0 && r < nrows; ++r) {
    std::uint64_t room = cap - length[r];
    std::uint64_t add = std::min(room, leftover);
    length[r] += add;
    leftover -= add;
  }
  return length;
}

CsrMatrix generate_power_law(const GeneratorSpec& s, Rng& rng) {
  const std::uint64_t cells = static_cast<std::uint64_t>(s.nrows) * s.ncols;
  if (s.target_nnz > cells) throw InfeasibleSpec("power-law-rows: target nnz exceeds nrows*ncols");
  if (!(s.exponent >= 0.0) || !std::isfinite(s.exponent))
    throw InfeasibleSpec("power-law-rows: exponent must be finite and non-negative");
  std::vector<std::uint64_t> length = power_law_lengths(s.nrows, s.ncols, s.target_nnz, s.exponent);

  // Ranks land on random rows.
  std::vector<std::size_t> row_of_rank(s.nrows);
  std::iota(row_of_rank.begin(), row_of_rank.end(), std::size_t{0});
  for (std::size_t i = s.nrows; i > 1; --i) std::swap(row_of_rank[i - 1], row_of_rank[rng.below(i)]);

  std::vector<Coord> coords;
  coords.reserve(s.target_nnz);
  for (std::size_t r = 0; r < s.nrows; ++r) {
    std::size_t row = row_of_rank[r];
    for (std::uint64_t c : sample_distinct(s.ncols, length[r], rng)) coords.push_back({row, c});
  }
  return assemble(s.nrows, s.ncols, std::move(coords), rng);
}

CsrMatrix generate_block_dense(const GeneratorSpec& s, Rng& rng) {
  if (s.block_size == 0) throw InfeasibleSpec("block-dense: block size must be positive");
  const std::uint64_t cells = static_cast<std::uint64_t>(s.nrows) * s.ncols;
  if (s.target_nnz > cells) throw InfeasibleSpec("block-dense: target nnz exceeds nrows*ncols");
  const std::size_t b = s.block_size;
  const std::uint64_t block_rows = (s.nrows + b - 1) / b;
  const std::uint64_t block_cols = (s.ncols + b - 1) / b;
  const std::uint64_t slots = block_rows * block_cols;

  // Lazy Fisher-Yates over block slots.
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto slot_at = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };

  std::vector<Coord> coords;
  coords.reserve(s.target_nnz);
  std::uint64_t remaining = s.target_nnz;
  for (std::uint64_t k = 0; k < slots && remaining > 0; ++k) {
    std::uint64_t pick = k + rng.below(slots - k);
    std::uint64_t slot = slot_at(pick);
    swapped[pick] = slot_at(k);
    std::uint64_t r0 = (slot / block_cols) * b;
    std::uint64_t c0 = (slot % block_cols) * b;
    std::uint64_t r1 = std::min<std::uint64_t>(r0 + b, s.nrows);
    std::uint64_t c1 = std::min<std::uint64_t>(c0 + b, s.ncols);
    for (std::uint64_t r = r0; r < r1 && remaining > 0; ++r)
      for (std::uint64_t c = c0; c < c1 && remaining > 0; ++c, --remaining) coords.push_back({r, c});
  }
  return assemble(s.nrows, s.ncols, std::move(coords), rng);
}

}  // namespace

CsrMatrix generate(const GeneratorSpec& spec) {
  if (spec.ncols > std::numeric_limits<index_t>::max() || spec.target_nnz > std::numeric_limits<index_t>::max())
    throw InfeasibleSpec("dimensions exceed 32-bit index range");
  Rng rng(spec.seed);
  switch (spec.kind) {
    case GeneratorKind::Banded: return generate_banded(spec, rng);
    case GeneratorKind::UniformRandom: return generate_uniform(spec, rng);
    case GeneratorKind::PowerLawRows: return generate_power_law(spec, rng);
    case GeneratorKind::BlockDense: return generate_block_dense(spec, rng);
  }
  throw InfeasibleSpec("unknown generator kind");
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Banded: return "banded";
    case GeneratorKind::UniformRandom: return "uniform-random";
    case GeneratorKind::PowerLawRows: return "power-law-rows";
    case GeneratorKind::BlockDense: return "block-dense";
  }
  return "?";
}

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "banded") return GeneratorKind::Banded;
  if (name == "uniform-random" || name == "uniform") return GeneratorKind::UniformRandom;
  if (name == "power-law-rows" || name == "power-law") return GeneratorKind::PowerLawRows;
  if (name == "block-dense" || name == "block") return GeneratorKind::BlockDense;
  throw std::invalid_argument("unknown generator kind '" + name + "'");
}

GeneratorSpec parse_generator_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  if (parts.size() < 5 || parts.size() > 6)
    throw std::invalid_argument("generator spec must be kind,rows,cols,nnz,seed[,extra]: '" + text + "'");
  GeneratorSpec spec;
  spec.kind = parse_generator_kind(parts[0]);
  if (parts.size() == 6 && spec.kind == GeneratorKind::UniformRandom)
    throw std::invalid_argument("uniform-random takes no extra parameter");
  try {
    spec.nrows = std::stoull(parts[1]);
    spec.ncols = std::stoull(parts[2]);
    spec.target_nnz = std::stoull(parts[3]);
    spec.seed = std::stoull(parts[4]);
    if (parts.size() == 6) {
      switch (spec.kind) {
        case GeneratorKind::Banded: spec.bandwidth = std::stoull(parts[5]); break;
        case GeneratorKind::PowerLawRows: spec.exponent = std::stod(parts[5]); break;
        case GeneratorKind::BlockDense: spec.block_size = std::stoull(parts[5]); break;
        case GeneratorKind::UniformRandom: break;
      }
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("malformed generator spec '" + text + "'");
  }
  return spec;
}

std::string format_generator_spec(const GeneratorSpec& spec) {
  std::ostringstream out;
  out << to_string(spec.kind) << ',' << spec.nrows << ',' << spec.ncols << ',' << spec.target_nnz << ','
      << spec.seed;
  switch (spec.kind) {
    case GeneratorKind::Banded: out << ',' << spec.bandwidth; break;
    case GeneratorKind::PowerLawRows: out << ',' << spec.exponent; break;
    case GeneratorKind::BlockDense: out << ',' << spec.block_size; break;
    case GeneratorKind::UniformRandom: break;
  }
  return out.str();
}

}  // namespace spmvopt
