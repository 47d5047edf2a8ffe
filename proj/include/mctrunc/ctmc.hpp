#pragma once

#include <string>
#include <vector>

#include "mctrunc/bounds.hpp"
#include "mctrunc/censor.hpp"
#include "mctrunc/lyapunov.hpp"
#include "mctrunc/model.hpp"
#include "mctrunc/state_space.hpp"

namespace mctrunc {

/// The embedded jump chain R(x, y) = Q(x, y) / lambda(x), R(x, x) = 0.
class EmbeddedChain : public ChainModel {
 public:
  explicit EmbeddedChain(const JumpModel& q) : q_(&q) {}

  std::string name() const override { return q_->name() + "/embedded"; }
  std::size_t dimension() const override { return q_->dimension(); }
  State seed() const override { return q_->seed(); }
  void transitions(const State& x, std::vector<Transition>& out) const override;

  const JumpModel& jump_model() const { return *q_; }

 private:
  const JumpModel* q_;
};

EmbeddedChain embed(const JumpModel& q);

/// lambda(x) over A; throws on an absorbing state.
Vector exit_rates(const JumpModel& q, const Truncation& t);

/// f~(x) = f(x) / lambda(x).
StateFunction transform_reward(const StateFunction& f, const JumpModel& q);

/// Q-form margin -slack(x) - sum_{y not in K} Q(x, y) g(y), evaluated as
/// Q(x, K) g(x) - sum_{y not in K, y != x} Q(x, y) (g(y) - g(x)) - slack(x).
double ctmc_drift_margin(const JumpModel& q, const StateFunction& g, const StateFunction& slack, const State& x,
                         const StatePredicate& in_k = nullptr);

struct CtmcDriftOptions {
  /// Require slack(x) >= lambda(x) on the checked region (positive recurrence
  /// of the embedded chain). When false the check is skipped with a warning.
  bool require_rate_envelope = true;
  double consistency_tolerance = 1e-9;
};

struct CtmcDriftReport {
  DriftReport q_form;
  DriftReport r_form;  // embedded chain with slack / lambda
  bool consistent = true;
  bool rate_envelope_checked = false;
};

CtmcDriftReport verify_ctmc_drift(const JumpModel& q, const StateFunction& g, const StateFunction& slack,
                                  const StatePredicate& in_k, const std::vector<State>& region,
                                  const CtmcDriftOptions& options = {});

/// K from Q-form violations of either drift inequality inside ball(max(n1, n2)).
std::vector<State> construct_K_ctmc(const JumpModel& q, const DriftSpec& q_spec);

/// The embedded-chain spec: r~ = r / lambda and slack2~ = slack2 / lambda.
DriftSpec embedded_spec(const JumpModel& q, const DriftSpec& q_spec);

/// c = max(0, max over the core of (Q g3)(x) + w(x)).
double ctmc_moment_bound(const JumpModel& q, const StateFunction& g3, const StateFunction& w,
                         const std::vector<State>& core);

/// Bounds on sum_x nu(x) f(x) for |f| <= r through the embedded chain, with
/// rewards f~, r~ and denominator e~ = 1 / lambda. `c` censors the embedded
/// truncation; h1, h2 are the embedded overflow vectors.
BoundReport ctmc_expectation_bounds(const Censoring& c, const JumpModel& q, const StateFunction& f,
                                    const StateFunction& r, const Vector& h1, const Vector& h2,
                                    const BoundOptions& options = {});

/// nu(x) proportional to pi(x) / lambda(x).
Vector jump_distribution(const Vector& pi_embedded, const Vector& lambda);

}  // namespace mctrunc
