#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>

namespace mctrunc {

/// A point of a structured state space, e.g. a lattice point in Z_+^d.
/// Small fixed capacity so states can be stored by value in hash maps.
class State {
 public:
  static constexpr std::size_t kMaxDim = 4;

  State() = default;
  State(std::initializer_list<std::int64_t> coords);
  explicit State(std::span<const std::int64_t> coords);

  std::size_t dim() const { return dim_; }
  std::int64_t operator[](std::size_t i) const { return coords_[i]; }
  std::int64_t& operator[](std::size_t i) { return coords_[i]; }

  /// Sum of coordinates.
  std::int64_t total() const;

  std::string to_string() const;

  friend bool operator==(const State&, const State&) = default;
  /// Lexicographic on the coordinates (unused slots are zero).
  friend std::strong_ordering operator<=>(const State& a, const State& b);

 private:
  std::array<std::int64_t, kMaxDim> coords_{};
  std::uint8_t dim_ = 0;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

using StateFunction = std::function<double(const State&)>;
using StatePredicate = std::function<bool(const State&)>;

}  // namespace mctrunc
