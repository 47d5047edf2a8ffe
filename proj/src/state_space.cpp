#include "mctrunc/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "mctrunc/errors.hpp"

namespace mctrunc {

StateSpace::StateSpace(std::size_t dimension, std::vector<State> k_states, std::vector<State> a_prime_states)
    : dimension_(dimension), k_size_(static_cast<Index>(k_states.size())) {
  std::sort(k_states.begin(), k_states.end());
  std::sort(a_prime_states.begin(), a_prime_states.end());
  states_ = std::move(k_states);
  states_.insert(states_.end(), a_prime_states.begin(), a_prime_states.end());
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].dim() != dimension_) throw ConfigError("state " + states_[i].to_string() + " has wrong dimension");
    if (!index_.emplace(states_[i], static_cast<Index>(i)).second) {
      throw ConfigError("duplicate state " + states_[i].to_string());
    }
  }
}

std::optional<Index> StateSpace::index_of(const State& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool StateSpace::in_k(const State& s) const {
  auto it = index_.find(s);
  return it != index_.end() && it->second < k_size_;
}

Vector Truncation::evaluate(const StateFunction& f) const {
  Vector v(size());
  for (Index i = 0; i < size(); ++i) {
    v[i] = f(space.state_of(i));
    if (!std::isfinite(v[i])) throw ConfigError("function is not finite at " + space.state_of(i).to_string());
  }
  return v;
}

std::vector<Transition> normalize_row(const State& x, std::vector<Transition> row, double tolerance) {
  for (const auto& t : row) {
    if (!std::isfinite(t.prob) || t.prob < 0.0) {
      throw ConfigError("row of state " + x.to_string() + " has an invalid entry towards " + t.to.to_string());
    }
    if (t.to.dim() != x.dim()) throw ConfigError("row of state " + x.to_string() + " has a target of wrong dimension");
  }
  std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
  std::vector<Transition> out;
  out.reserve(row.size());
  double total = 0.0;
  for (const auto& t : row) {
    total += t.prob;
    if (t.prob == 0.0) continue;
    if (!out.empty() && out.back().to == t.to) {
      out.back().prob += t.prob;
    } else {
      out.push_back(t);
    }
  }
  if (!(std::abs(total - 1.0) <= tolerance)) {
    throw ConfigError("row of state " + x.to_string() + " sums to " + std::to_string(total) + ", not 1");
  }
  return out;
}

Truncation enumerate(const ChainModel& model, const StatePredicate& in_a, const StatePredicate& in_k,
                     const EnumerateOptions& options) {
  const State seed = model.seed();
  if (!in_a(seed)) throw ConfigError("seed state " + seed.to_string() + " is not in the truncation set");

  // Pass 1: discover A and cache rows.
  std::unordered_map<State, std::size_t, StateHash> seen;
  std::vector<State> order;
  std::vector<std::vector<Transition>> rows;
  std::deque<std::size_t> queue;
  seen.emplace(seed, 0);
  order.push_back(seed);
  queue.push_back(0);
  std::vector<Transition> buffer;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const State x = order[i];
    buffer.clear();
    model.transitions(x, buffer);
    auto row = normalize_row(x, buffer, options.row_sum_tolerance);
    for (const auto& t : row) {
      if (seen.count(t.to)) continue;
      if (!in_a(t.to)) {
        if (in_k(t.to)) throw ConfigError("state " + t.to.to_string() + " is in K but not in A");
        continue;
      }
      if (order.size() >= options.max_states) {
        throw ConfigError("enumeration exceeded the cap of " + std::to_string(options.max_states) + " states");
      }
      seen.emplace(t.to, order.size());
      order.push_back(t.to);
      queue.push_back(order.size() - 1);
    }
    if (rows.size() <= i) rows.resize(i + 1);
    rows[i] = std::move(row);
  }

  std::vector<State> k_states, a_prime_states;
  for (const auto& s : order) (in_k(s) ? k_states : a_prime_states).push_back(s);
  if (k_states.empty()) throw ConfigError("return set K is empty");

  Truncation t;
  t.space = StateSpace(model.dimension(), std::move(k_states), std::move(a_prime_states));
  const Index n = t.space.size();
  t.partition.k_size = t.space.k_size();
  t.partition.a_prime_size = t.space.a_prime_size();
  t.partition.boundary_rows.resize(static_cast<std::size_t>(n));
  t.exit_mass = Vector::Zero(n);

  // Pass 2: assemble the A x A block and the boundary rows in index order.
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t old = 0; old < order.size(); ++old) {
    const Index i = *t.space.index_of(order[old]);
    for (const auto& tr : rows[old]) {
      if (auto j = t.space.index_of(tr.to)) {
        trip.emplace_back(i, *j, tr.prob);
      } else {
        t.partition.boundary_rows[static_cast<std::size_t>(i)].push_back(tr);
        t.exit_mass[i] += tr.prob;
      }
    }
  }
  t.p.resize(n, n);
  t.p.setFromTriplets(trip.begin(), trip.end());
  t.p.makeCompressed();
  return t;
}

namespace {

SparseMatrix block(const SparseMatrix& p, Index r0, Index rn, Index c0, Index cn) {
  SparseMatrix out = p.block(r0, c0, rn, cn);
  out.makeCompressed();
  return out;
}

}  // namespace

Blocks make_blocks(const Truncation& t) {
  const Index k = t.k_size();
  const Index m = t.a_prime_size();
  Blocks b;
  b.p11 = block(t.p, 0, k, 0, k);
  b.p12 = block(t.p, 0, k, k, m);
  b.p21 = block(t.p, k, m, 0, k);
  b.p22 = block(t.p, k, m, k, m);
  b.exit_k = t.exit_mass.head(k);
  b.exit_a_prime = t.exit_mass.tail(m);
  b.to_k = Vector::Zero(m);
  for (Index i = 0; i < m; ++i) {
    for (SparseMatrix::InnerIterator it(b.p21, i); it; ++it) b.to_k[i] += it.value();
  }
  return b;
}

}  // namespace mctrunc
