#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mctrunc/linalg.hpp"
#include "mctrunc/model.hpp"
#include "mctrunc/state.hpp"

namespace mctrunc {

/// Dense indexing of the truncation set A. Indices [0, k_size) hold K and
/// [k_size, k_size + a_prime_size) hold A' = A - K, each block in
/// lexicographic order of the states.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(std::size_t dimension, std::vector<State> k_states, std::vector<State> a_prime_states);

  std::size_t dimension() const { return dimension_; }
  Index size() const { return static_cast<Index>(states_.size()); }
  Index k_size() const { return k_size_; }
  Index a_prime_size() const { return size() - k_size_; }

  std::optional<Index> index_of(const State& s) const;
  const State& state_of(Index i) const { return states_[static_cast<std::size_t>(i)]; }
  const std::vector<State>& states() const { return states_; }

  bool in_a(const State& s) const { return index_.count(s) != 0; }
  bool in_k(const State& s) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<State> states_;
  std::unordered_map<State, Index, StateHash> index_;
  Index k_size_ = 0;
};

struct Partition {
  Index k_size = 0;
  Index a_prime_size = 0;
  /// For each index of A, the transitions leaving A (targets in A^c).
  std::vector<std::vector<Transition>> boundary_rows;
};

/// The restriction of a chain to a finite truncation set.
struct Truncation {
  StateSpace space;
  Partition partition;
  SparseMatrix p;    // A x A block of the transition matrix
  Vector exit_mass;  // P(x, A^c), summed from the boundary rows

  Index size() const { return space.size(); }
  Index k_size() const { return space.k_size(); }
  Index a_prime_size() const { return space.a_prime_size(); }

  /// Evaluates a state function on every state of A, in index order.
  Vector evaluate(const StateFunction& f) const;
};

/// Block partition of the A x A matrix into K and A' parts, plus the
/// exact masses leaving each row towards K and towards A^c.
struct Blocks {
  SparseMatrix p11, p12, p21, p22;
  Vector exit_k;        // P(x, A^c), x in K
  Vector exit_a_prime;  // P(x, A^c), x in A'
  Vector to_k;          // P(x, K), x in A'
};

Blocks make_blocks(const Truncation& t);

struct EnumerateOptions {
  std::size_t max_states = 50'000'000;
  double row_sum_tolerance = 1e-12;
};

/// Breadth-first enumeration of the states of A reachable from the model's
/// seed without leaving A, with K = {x in A : in_k(x)} placed first.
Truncation enumerate(const ChainModel& model, const StatePredicate& in_a, const StatePredicate& in_k,
                     const EnumerateOptions& options = {});

/// Validates and merges a model row: entries finite and nonnegative, duplicate
/// targets combined, zeros dropped, total within `tolerance` of one.
std::vector<Transition> normalize_row(const State& x, std::vector<Transition> row, double tolerance);

}  // namespace mctrunc
