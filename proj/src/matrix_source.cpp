#include "spmvopt/matrix_source.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "spmvopt/generator.hpp"
#include "spmvopt/matrix_market.hpp"

namespace spmvopt {
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_generated(const std::string& source) { return source.rfind("gen:", 0) == 0; }

}  // namespace

NamedMatrix load_matrix(const std::string& source) {
  if (is_generated(source)) {
    GeneratorSpec spec = parse_generator_spec(source.substr(4));
    return {source, generate(spec)};
  }
  fs::path path(source);
  if (!fs::exists(path)) throw std::runtime_error("no such matrix file: " + source);
  return {path.stem().string(), read_matrix_market(path)};
}

std::vector<std::string> generated_suite(std::size_t count, std::uint64_t seed, std::size_t max_rows) {
  if (max_rows < 16) throw std::invalid_argument("generated_suite: max_rows must be at least 16");
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };

  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    GeneratorSpec s;
    s.kind = static_cast<GeneratorKind>(i % 4);
    s.nrows = pick(std::max<std::size_t>(16, max_rows / 8), max_rows);
    s.ncols = s.nrows;
    s.seed = rng();
    switch (s.kind) {
      case GeneratorKind::Banded:
        s.bandwidth = 2 * pick(1, 7) + 1;
        s.target_nnz = s.nrows * s.bandwidth * 8 / 10;
        break;
      case GeneratorKind::UniformRandom:
        s.target_nnz = s.nrows * pick(4, 16);
        break;
      case GeneratorKind::PowerLawRows:
        s.exponent = 1.0 + 0.25 * static_cast<double>(pick(0, 4));
        s.target_nnz = s.nrows * pick(4, 16);
        break;
      case GeneratorKind::BlockDense:
        s.block_size = pick(0, 1) ? 8 : 4;
        s.target_nnz = s.nrows * pick(8, 24);
        break;
    }
    out.push_back("gen:" + format_generator_spec(s));
  }
  return out;
}

std::vector<std::string> expand_corpus(const std::string& corpus) {
  if (corpus.rfind("suite:", 0) == 0) {
    const std::string args = corpus.substr(6);
    const auto comma = args.find(',');
    try {
      std::size_t count = std::stoul(args.substr(0, comma));
      std::uint64_t seed = comma == std::string::npos ? 1 : std::stoull(args.substr(comma + 1));
      return generated_suite(count, seed);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("malformed corpus '" + corpus + "', expected suite:N[,seed]");
    }
  }

  fs::path path(corpus);
  std::vector<std::string> out;
  if (!is_generated(corpus) && fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".mtx") out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
  }
  if (!is_generated(corpus) && fs::is_regular_file(path) && path.extension() != ".mtx") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus list " + corpus);
    for (std::string line; std::getline(in, line);) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (!is_generated(line) && fs::path(line).is_relative()) line = (path.parent_path() / line).string();
      out.push_back(line);
    }
    return out;
  }

  std::size_t pos = 0;
  while (pos <= corpus.size()) {
    std::size_t next = corpus.find(';', pos);
    if (next == std::string::npos) next = corpus.size();
    std::string item = trim(corpus.substr(pos, next - pos));
    if (!item.empty()) out.push_back(item);
    pos = next + 1;
  }
  return out;
}

}  // namespace spmvopt
