#include "spmvopt/matrix_market.hpp"

#include <algorithm>
#include <cstdio>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>
#include <vector>

namespace spmvopt {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Entry {
  index_t row;
  index_t col;
  double value;
};

enum class Field { Real, Integer, Pattern };

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw MatrixMarketError("empty file", 1);
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field_s, symmetry_s;
  header >> banner >> object >> format >> field_s >> symmetry_s;
  if (banner != "%%MatrixMarket") throw MatrixMarketError("missing %%MatrixMarket banner", lineno);
  object = lower(object);
  format = lower(format);
  field_s = lower(field_s);
  symmetry_s = lower(symmetry_s);
  if (object != "matrix") throw MatrixMarketError("unsupported object '" + object + "'", lineno);
  if (format != "coordinate") throw MatrixMarketError("unsupported format '" + format + "' (coordinate only)", lineno);

  Field field;
  if (field_s == "real" || field_s == "double") {
    field = Field::Real;
  } else if (field_s == "integer") {
    field = Field::Integer;
  } else if (field_s == "pattern") {
    field = Field::Pattern;
  } else if (field_s == "complex") {
    throw MatrixMarketError("complex matrices are not supported", lineno);
  } else {
    throw MatrixMarketError("unknown field '" + field_s + "'", lineno);
  }

  bool symmetric;
  if (symmetry_s == "general") {
    symmetric = false;
  } else if (symmetry_s == "symmetric") {
    symmetric = true;
  } else {
    throw MatrixMarketError("unsupported symmetry '" + symmetry_s + "'", lineno);
  }

  // Skip comments and blank lines up to the size line.
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    have_size = true;
    break;
  }
  if (!have_size) throw MatrixMarketError("missing size line", lineno);

  unsigned long long nrows = 0, ncols = 0, nentries = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nrows >> ncols >> nentries)) throw MatrixMarketError("malformed size line", lineno);
  }
  if (ncols > std::numeric_limits<index_t>::max() || nrows > std::numeric_limits<index_t>::max())
    throw MatrixMarketError("matrix dimensions exceed 32-bit index range", lineno);

  std::vector<Entry> entries;
  entries.reserve(symmetric ? 2 * nentries : nentries);
  unsigned long long seen = 0;
  while (seen < nentries && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    unsigned long long r = 0, c = 0;
    double v = 1.0;
    if (!(ss >> r >> c)) throw MatrixMarketError("malformed coordinate entry", lineno);
    if (field != Field::Pattern) {
      if (field == Field::Integer) {
        long long iv;
        if (!(ss >> iv)) throw MatrixMarketError("missing integer value", lineno);
        v = static_cast<double>(iv);
      } else if (!(ss >> v)) {
        throw MatrixMarketError("missing real value", lineno);
      }
    }
    if (r < 1 || r > nrows || c < 1 || c > ncols) throw MatrixMarketError("coordinate out of range", lineno);
    auto ri = static_cast<index_t>(r - 1);
    auto ci = static_cast<index_t>(c - 1);
    entries.push_back({ri, ci, v});
    if (symmetric && ri != ci) entries.push_back({ci, ri, v});
    ++seen;
  }
  if (seen < nentries)
    throw MatrixMarketError("expected " + std::to_string(nentries) + " entries, found " + std::to_string(seen),
                            lineno);

  // Stable sort keeps duplicates in file order, so they are summed in that order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

  CsrMatrix m;
  m.nrows = nrows;
  m.ncols = ncols;
  m.rowptr.assign(nrows + 1, 0);
  m.colind.reserve(entries.size());
  m.values.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    if (k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      m.values.back() += e.value;
      continue;
    }
    m.colind.push_back(e.col);
    m.values.push_back(e.value);
    ++m.rowptr[e.row + 1];
  }
  if (m.colind.size() > std::numeric_limits<index_t>::max())
    throw MatrixMarketError("NNZ exceeds 32-bit index range", lineno);
  for (std::size_t i = 0; i < nrows; ++i) m.rowptr[i + 1] += m.rowptr[i];
  return m;
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(const CsrMatrix& m, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.nrows << ' ' << m.ncols << ' ' << m.nnz() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < m.nrows; ++i) {
    for (index_t j = m.rowptr[i]; j < m.rowptr[i + 1]; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.values[j]);
      out << (i + 1) << ' ' << (m.colind[j] + 1) << ' ' << buf << '\n';
    }
  }
}

void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_matrix_market(m, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace spmvopt
