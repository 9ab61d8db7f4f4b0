#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "remex/error.hpp"

namespace remex {

/// Hard cap for code paths that enumerate all 2^d subsets.
inline constexpr int kExhaustiveCap = 24;

/// A subset of player indices {0, ..., d-1} packed into a word.
/// Bit j set means player j is a member. Players are 0-based here;
/// file formats and the CLI use 1-based indices.
class Mask {
 public:
  static constexpr int kMaxPlayers = 63;

  Mask() = default;

  Mask(std::uint64_t bits, int d) : bits_(bits), d_(d) {
    require(d >= 0 && d <= kMaxPlayers, Errc::dimension_too_large,
            "mask width must be in [0, 63], got " + std::to_string(d));
    require(d == kMaxPlayers || (bits >> d) == 0, Errc::index_out_of_range,
            "mask has bits set at or above dimension " + std::to_string(d));
  }

  static Mask empty(int d) { return Mask(0, d); }
  static Mask full(int d) {
    return Mask(d == 0 ? 0 : (~std::uint64_t{0} >> (64 - d)), d);
  }
  static Mask single(int i, int d) { return empty(d).with(i); }

  int dim() const { return d_; }
  std::uint64_t bits() const { return bits_; }
  int count() const { return std::popcount(bits_); }
  bool none() const { return bits_ == 0; }
  bool all() const { return bits_ == full(d_).bits_; }

  bool contains(int i) const {
    check_index(i);
    return (bits_ >> i) & 1u;
  }

  Mask with(int i) const {
    check_index(i);
    return Mask(bits_ | (std::uint64_t{1} << i), d_);
  }

  Mask without(int i) const {
    check_index(i);
    return Mask(bits_ & ~(std::uint64_t{1} << i), d_);
  }

  Mask toggled(int i) const {
    check_index(i);
    return Mask(bits_ ^ (std::uint64_t{1} << i), d_);
  }

  Mask complement() const { return Mask(full(d_).bits_ ^ bits_, d_); }

  /// Member indices in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (int i = 0; i < d_; ++i) {
      if ((bits_ >> i) & 1u) out.push_back(i);
    }
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i : members()) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
    return s + "}";
  }

  friend bool operator==(const Mask& a, const Mask& b) {
    return a.bits_ == b.bits_ && a.d_ == b.d_;
  }

 private:
  void check_index(int i) const {
    require(i >= 0 && i < d_, Errc::index_out_of_range,
            "player index " + std::to_string(i) + " out of range for d=" + std::to_string(d_));
  }

  std::uint64_t bits_ = 0;
  int d_ = 0;
};

inline void check_exhaustive_dim(int d, int cap = kExhaustiveCap) {
  require(d >= 0, Errc::index_out_of_range, "negative dimension");
  require(d <= cap, Errc::dimension_too_large,
          "d=" + std::to_string(d) + " exceeds the exhaustive cap " + std::to_string(cap));
}

/// All 2^d masks in increasing unsigned-integer order.
inline std::vector<Mask> enumerate_subsets(int d) {
  check_exhaustive_dim(d);
  std::vector<Mask> out;
  out.reserve(std::size_t{1} << d);
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << d); ++b) {
    out.emplace_back(b, d);
  }
  return out;
}

}  // namespace remex
