#include "histolim/cell_index.hpp"

#include <algorithm>

#include "histolim/error.hpp"

namespace histolim {
namespace {

void check_level(int level) {
  if (level < 0 || level > CellIndex::kMaxLevel) {
    throw CapacityError("cell index level " + std::to_string(level) + " outside [0, " +
                        std::to_string(CellIndex::kMaxLevel) + "]");
  }
}

std::uint64_t low_mask(int level) {
  return level == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << level) - 1);
}

}  // namespace

CellIndex CellIndex::from_bits(std::uint64_t bits, int level) {
  check_level(level);
  return CellIndex(bits & low_mask(level), level);
}

CellIndex CellIndex::parse(std::string_view digits) {
  check_level(static_cast<int>(digits.size()));
  std::uint64_t bits = 0;
  for (char c : digits) {
    if (c != '0' && c != '1') {
      throw ValidationError("cell index must be a binary string, got '" + std::string(digits) + "'");
    }
    bits = (bits << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return CellIndex(bits, static_cast<int>(digits.size()));
}

CellIndex CellIndex::zeros(int level) { return from_bits(0, level); }

CellIndex CellIndex::ones(int level) { return from_bits(~std::uint64_t{0}, level); }

int CellIndex::digit(int l) const {
  if (l < 1 || l > level_) throw ValidationError("digit position out of range");
  return static_cast<int>((bits_ >> (level_ - l)) & 1u);
}

CellIndex CellIndex::child(int d) const {
  check_level(level_ + 1);
  return CellIndex((bits_ << 1) | static_cast<std::uint64_t>(d != 0), level_ + 1);
}

CellIndex CellIndex::prefix(int l) const {
  if (l < 0 || l > level_) throw ValidationError("prefix length out of range");
  return CellIndex(l == 0 ? 0 : bits_ >> (level_ - l), l);
}

CellIndex CellIndex::flipped() const {
  if (level_ == 0) throw ValidationError("the root index has no last digit");
  return CellIndex(bits_ ^ 1u, level_);
}

CellIndex CellIndex::concat(const CellIndex& tail) const {
  check_level(level_ + tail.level_);
  return CellIndex(tail.level_ == 0 ? bits_ : (bits_ << tail.level_) | tail.bits_,
                   level_ + tail.level_);
}

bool CellIndex::is_prefix_of(const CellIndex& other) const {
  return level_ <= other.level_ && other.prefix(level_) == *this;
}

std::string CellIndex::to_string() const {
  std::string s(static_cast<std::size_t>(level_), '0');
  for (int l = 1; l <= level_; ++l) {
    if (digit(l)) s[static_cast<std::size_t>(l - 1)] = '1';
  }
  return s;
}

std::strong_ordering operator<=>(const CellIndex& a, const CellIndex& b) {
  const int common = std::min(a.level_, b.level_);
  const std::uint64_t pa = common == 0 ? 0 : a.bits_ >> (a.level_ - common);
  const std::uint64_t pb = common == 0 ? 0 : b.bits_ >> (b.level_ - common);
  if (pa != pb) return pa <=> pb;
  return a.level_ <=> b.level_;
}

}  // namespace histolim
