#include "spmvopt/class_set.hpp"

#include <stdexcept>

namespace spmvopt {

std::string_view to_string(Bottleneck b) {
  switch (b) {
    case Bottleneck::MB: return "MB";
    case Bottleneck::ML: return "ML";
    case Bottleneck::IMB: return "IMB";
    case Bottleneck::CMP: return "CMP";
  }
  return "?";
}

std::string to_string(ClassSet s) {
  if (s.empty()) return "NONE";
  std::string out;
  for (Bottleneck b : kAllBottlenecks) {
    if (!s.contains(b)) continue;
    if (!out.empty()) out += ';';
    out += to_string(b);
  }
  return out;
}

ClassSet parse_class_set(std::string_view text) {
  ClassSet s;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find_first_of(";,", pos);
    if (next == std::string_view::npos) next = text.size();
    std::string_view token = text.substr(pos, next - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
    if (token.empty() || token == "NONE") {
    } else if (token == "MB") {
      s.insert(Bottleneck::MB);
    } else if (token == "ML") {
      s.insert(Bottleneck::ML);
    } else if (token == "IMB") {
      s.insert(Bottleneck::IMB);
    } else if (token == "CMP") {
      s.insert(Bottleneck::CMP);
    } else {
      throw std::invalid_argument("unknown class '" + std::string(token) + "'");
    }
    pos = next + 1;
  }
  return s;
}

}  // namespace spmvopt
