#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mctrunc/linalg.hpp"
#include "mctrunc/model.hpp"
#include "mctrunc/state_space.hpp"

namespace mctrunc {

/// Lists the states whose size (a model-defined norm such as x or x1 + x2)
/// is below the given radius.
using BallFunction = std::function<std::vector<State>(std::int64_t radius)>;

/// Model-supplied Lyapunov data: the functions and the radii beyond which the
/// drift inequalities are proved analytically. Only the finite region inside
/// the radii is re-verified numerically.
struct DriftSpec {
  StateFunction g1;      // reward drift: P g1 <= g1 - r off K
  StateFunction g2;      // time drift: P g2 <= g2 - slack2 off K
  StateFunction r;       // envelope reward
  StateFunction slack2;  // one, unless the chain is an embedded jump chain
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  BallFunction ball;
};

struct DriftReport {
  std::vector<State> violations;  // in state order
  double worst_margin = 0.0;      // most negative (or smallest) margin seen
  State worst_state;
  std::size_t checked = 0;
  bool verified() const { return violations.empty(); }
};

/// g(x) - slack(x) - sum_{y not in K} P(x, y) g(y), evaluated as
/// P(x, K) g(x) - sum_{y not in K} P(x, y) (g(y) - g(x)) - slack(x) so that no
/// large terms cancel. With `in_k` empty the sum runs over every y.
double drift_margin(const ChainModel& model, const StateFunction& g, const StateFunction& slack, const State& x,
                    const StatePredicate& in_k = nullptr);

/// Checks the drift inequality at every state of `region` outside K.
DriftReport verify_drift(const ChainModel& model, const StateFunction& g, const StateFunction& slack,
                         const StatePredicate& in_k, const std::vector<State>& region);

/// K = the states of ball(max(n1, n2)) at which either full drift inequality
/// fails, in state order. Throws when drift also fails on the whole shell just
/// outside the ball, which contradicts the analytic certificate.
std::vector<State> construct_K(const ChainModel& model, const DriftSpec& spec);

/// Shared rule for turning per-state violation flags into K, given the ball of
/// radius R and the ball of radius R + 1.
std::vector<State> select_violators(const std::vector<State>& ball, const std::vector<State>& outer,
                                    const std::function<bool(const State&)>& violates);

/// h(x) = sum_{y in A^c} P(x, y) g(y) over A, from the boundary rows.
Vector compute_h(const Truncation& t, const StateFunction& g);

/// c = max(0, max over the core of (P g3)(x) - g3(x) + w(x)).
double moment_bound(const ChainModel& model, const StateFunction& g3, const StateFunction& w,
                    const std::vector<State>& core);

/// A verified pair of drift certificates with the exact overflow vectors on A.
struct LyapunovCertificate {
  StateFunction g1, g2, r;
  StateFunction slack2;
  Vector h1, h2;  // over A
  DriftReport drift1, drift2;
  std::int64_t n1 = 0, n2 = 0;
  bool single_pair = false;
  std::size_t region_size = 0;

  bool verified() const { return drift1.verified() && drift2.verified(); }
  /// Replayable record: g and h over A, the radii and the verification results.
  nlohmann::json to_json(const Truncation& t) const;
  /// FNV-1a hash of the serialized record.
  std::string hash(const Truncation& t) const;
};

/// Verifies both drift conditions on ball(n_i) together with A (minus K) and
/// computes h1, h2 on A.
LyapunovCertificate certify(const ChainModel& model, const Truncation& t, const DriftSpec& spec);

/// Single-pair mode: g1 = g2 = g with slack max(r, slack2), so that h1 = h2.
DriftSpec single_pair(const DriftSpec& spec, const StateFunction& g, std::int64_t radius);

/// States of `a` and `b` merged without duplicates, in state order.
std::vector<State> merge_regions(std::vector<State> a, const std::vector<State>& b);

std::string fnv1a_hex(const std::string& data);

}  // namespace mctrunc
