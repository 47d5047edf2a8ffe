#include "mctrunc/state.hpp"

#include <algorithm>

#include "mctrunc/errors.hpp"

namespace mctrunc {

State::State(std::initializer_list<std::int64_t> coords)
    : State(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

State::State(std::span<const std::int64_t> coords) {
  if (coords.size() > kMaxDim) {
    throw ConfigError("state dimension " + std::to_string(coords.size()) + " exceeds " +
                      std::to_string(kMaxDim));
  }
  std::copy(coords.begin(), coords.end(), coords_.begin());
  dim_ = static_cast<std::uint8_t>(coords.size());
}

std::int64_t State::total() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < dim_; ++i) s += coords_[i];
  return s;
}

std::string State::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < dim_; ++i) {
    if (i) out += ",";
    out += std::to_string(coords_[i]);
  }
  return out + ")";
}

std::strong_ordering operator<=>(const State& a, const State& b) {
  if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
  for (std::size_t i = 0; i < a.dim_; ++i) {
    if (auto c = a.coords_[i] <=> b.coords_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t StateHash::operator()(const State& s) const noexcept {
  // splitmix-style mixing of each coordinate
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.dim();
  for (std::size_t i = 0; i < s.dim(); ++i) {
    std::uint64_t z = static_cast<std::uint64_t>(s[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    h ^= z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace mctrunc
