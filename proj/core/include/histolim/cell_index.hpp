#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace histolim {

/// A finite binary sequence e_1...e_m addressing a node of the dyadic tree.
/// The empty sequence is the root. Digits are packed into a 64-bit word, so
/// at most kMaxLevel digits can be represented.
class CellIndex {
 public:
  static constexpr int kMaxLevel = 63;

  CellIndex() = default;

  /// Builds the index whose digits are the `level` low bits of `bits`, most
  /// significant first. Throws CapacityError when level > kMaxLevel.
  static CellIndex from_bits(std::uint64_t bits, int level);
  /// Parses "0110"; the empty string is the root.
  static CellIndex parse(std::string_view digits);

  static CellIndex zeros(int level);  // o_m
  static CellIndex ones(int level);   // i_m

  int level() const noexcept { return level_; }
  std::uint64_t bits() const noexcept { return bits_; }
  bool empty() const noexcept { return level_ == 0; }

  /// Digit l (1-based, l <= level()).
  int digit(int l) const;
  int last_digit() const { return digit(level_); }

  CellIndex child(int digit) const;
  /// First l digits.
  CellIndex prefix(int l) const;
  CellIndex parent() const { return prefix(level_ - 1); }
  /// Same index with the last digit negated.
  CellIndex flipped() const;
  CellIndex concat(const CellIndex& tail) const;
  bool is_prefix_of(const CellIndex& other) const;

  std::string to_string() const;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  /// Lexicographic order of the digit strings.
  friend std::strong_ordering operator<=>(const CellIndex& a, const CellIndex& b);

 private:
  CellIndex(std::uint64_t bits, int level) : bits_(bits), level_(level) {}

  std::uint64_t bits_ = 0;
  int level_ = 0;
};

}  // namespace histolim

template <>
struct std::hash<histolim::CellIndex> {
  std::size_t operator()(const histolim::CellIndex& c) const noexcept {
    return std::hash<std::uint64_t>{}(c.bits() * 131u + static_cast<std::uint64_t>(c.level()));
  }
};
