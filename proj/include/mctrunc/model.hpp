#pragma once

#include <string>
#include <vector>

#include "mctrunc/state.hpp"

namespace mctrunc {

struct Transition {
  State to;
  double prob;
};

/// A discrete-time chain given by exact, finitely supported rows P(x, .).
class ChainModel {
 public:
  virtual ~ChainModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  /// A state from which the truncation set is reached by breadth-first expansion.
  virtual State seed() const = 0;
  /// Appends the nonzero entries of row x (self-loops included) to `out`.
  /// Entries are nonnegative and sum to one.
  virtual void transitions(const State& x, std::vector<Transition>& out) const = 0;
};

struct Rate {
  State to;
  double rate;
};

/// A Markov jump process given by its off-diagonal rate rows Q(x, y), y != x.
class JumpModel {
 public:
  virtual ~JumpModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual State seed() const = 0;
  /// Appends the positive off-diagonal rates out of x to `out`.
  virtual void rates(const State& x, std::vector<Rate>& out) const = 0;

  /// Total jump rate lambda(x) = -Q(x, x).
  double exit_rate(const State& x) const;
};

}  // namespace mctrunc
