#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace spmvopt {

/// Performance bottleneck classes.
enum class Bottleneck : std::uint8_t {
  MB = 0,   ///< memory bandwidth
  ML = 1,   ///< memory latency
  IMB = 2,  ///< thread imbalance
  CMP = 3,  ///< computation
};

inline constexpr std::array<Bottleneck, 4> kAllBottlenecks = {Bottleneck::MB, Bottleneck::ML, Bottleneck::IMB,
                                                              Bottleneck::CMP};

std::string_view to_string(Bottleneck b);

/// Subset of the four bottleneck classes. The empty set means no optimization
/// is worth applying; it is spelled "NONE" in text form.
class ClassSet {
 public:
  constexpr ClassSet() = default;
  constexpr ClassSet(std::initializer_list<Bottleneck> members) {
    for (Bottleneck b : members) insert(b);
  }
  static constexpr ClassSet from_bits(std::uint8_t bits) {
    ClassSet s;
    s.bits_ = bits & 0xF;
    return s;
  }

  constexpr void insert(Bottleneck b) { bits_ |= bit(b); }
  constexpr void erase(Bottleneck b) { bits_ &= static_cast<std::uint8_t>(~bit(b)); }
  constexpr bool contains(Bottleneck b) const { return bits_ & bit(b); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr std::size_t size() const {
    return (bits_ & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1) + ((bits_ >> 3) & 1);
  }

  constexpr ClassSet operator&(ClassSet o) const { return from_bits(bits_ & o.bits_); }
  constexpr ClassSet operator|(ClassSet o) const { return from_bits(bits_ | o.bits_); }
  friend constexpr bool operator==(ClassSet, ClassSet) = default;

 private:
  static constexpr std::uint8_t bit(Bottleneck b) { return static_cast<std::uint8_t>(1u << static_cast<int>(b)); }
  std::uint8_t bits_ = 0;
};

/// "MB;ML", or "NONE" for the empty set.
std::string to_string(ClassSet s);
/// Accepts ';' or ',' separators; "NONE" and "" give the empty set.
ClassSet parse_class_set(std::string_view text);

}  // namespace spmvopt
