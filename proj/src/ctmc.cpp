#include "mctrunc/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mctrunc/errors.hpp"
#include "mctrunc/log.hpp"

namespace mctrunc {

namespace {

double positive_rate(const JumpModel& q, const State& x) {
  const double lambda = q.exit_rate(x);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw AssumptionViolation("jump model: state " + x.to_string() + " is absorbing or has an invalid exit rate");
  }
  return lambda;
}

}  // namespace

void EmbeddedChain::transitions(const State& x, std::vector<Transition>& out) const {
  std::vector<Rate> rates;
  q_->rates(x, rates);
  double lambda = 0.0;
  for (const auto& r : rates) {
    if (!(r.rate >= 0.0) || !std::isfinite(r.rate)) throw ConfigError("jump model: invalid rate out of " + x.to_string());
    if (r.to != x) lambda += r.rate;
  }
  if (!(lambda > 0.0)) throw AssumptionViolation("jump model: state " + x.to_string() + " is absorbing");
  for (const auto& r : rates) {
    if (r.to != x && r.rate > 0.0) out.push_back({r.to, r.rate / lambda});
  }
}

EmbeddedChain embed(const JumpModel& q) { return EmbeddedChain(q); }

Vector exit_rates(const JumpModel& q, const Truncation& t) {
  Vector lambda(t.size());
  for (Index i = 0; i < t.size(); ++i) lambda[i] = positive_rate(q, t.space.state_of(i));
  return lambda;
}

StateFunction transform_reward(const StateFunction& f, const JumpModel& q) {
  return [f, &q](const State& x) { return f(x) / positive_rate(q, x); };
}

double ctmc_drift_margin(const JumpModel& q, const StateFunction& g, const StateFunction& slack, const State& x,
                         const StatePredicate& in_k) {
  std::vector<Rate> rates;
  q.rates(x, rates);
  const double gx = g(x);
  if (!std::isfinite(gx)) throw ConfigError("g is not finite at " + x.to_string());
  double to_k = 0.0, change = 0.0;
  for (const auto& r : rates) {
    if (r.to == x || r.rate == 0.0) continue;
    if (in_k && in_k(r.to)) {
      to_k += r.rate;
    } else {
      const double gy = g(r.to);
      if (!std::isfinite(gy)) throw ConfigError("g is not finite at " + r.to.to_string());
      change += r.rate * (gy - gx);
    }
  }
  const double s = slack(x);
  if (!std::isfinite(s)) throw ConfigError("slack is not finite at " + x.to_string());
  return to_k * gx - change - s;
}

CtmcDriftReport verify_ctmc_drift(const JumpModel& q, const StateFunction& g, const StateFunction& slack,
                                  const StatePredicate& in_k, const std::vector<State>& region,
                                  const CtmcDriftOptions& options) {
  std::vector<State> sorted = merge_regions(region, {});
  if (options.require_rate_envelope) {
    for (const auto& x : sorted) {
      if (!(slack(x) >= positive_rate(q, x))) {
        throw AssumptionViolation("verify_ctmc_drift: envelope r(x) < lambda(x) at " + x.to_string() +
                                  "; positive recurrence of the embedded chain is not certified");
      }
    }
  } else {
    log_warning("verify_ctmc_drift: r >= lambda check skipped; bounds rely on the identity for null-recurrent embedded chains");
  }
  CtmcDriftReport rep;
  rep.rate_envelope_checked = options.require_rate_envelope;
  const EmbeddedChain chain(q);
  const StateFunction slack_r = transform_reward(slack, q);
  rep.q_form.worst_margin = rep.r_form.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : sorted) {
    if (in_k && in_k(x)) continue;
    const double mq = ctmc_drift_margin(q, g, slack, x, in_k);
    const double mr = drift_margin(chain, g, slack_r, x, in_k);
    const double lambda = positive_rate(q, x);
    for (auto* pair : {&rep.q_form, &rep.r_form}) ++pair->checked;
    if (mq < rep.q_form.worst_margin) {
      rep.q_form.worst_margin = mq;
      rep.q_form.worst_state = x;
    }
    if (mr < rep.r_form.worst_margin) {
      rep.r_form.worst_margin = mr;
      rep.r_form.worst_state = x;
    }
    if (mq < 0.0) rep.q_form.violations.push_back(x);
    if (mr < 0.0) rep.r_form.violations.push_back(x);
    const double scale = std::max({1.0, std::abs(mq), std::abs(g(x)) * lambda});
    if (std::abs(mr * lambda - mq) > options.consistency_tolerance * scale) rep.consistent = false;
  }
  if (rep.q_form.checked == 0) rep.q_form.worst_margin = rep.r_form.worst_margin = 0.0;
  if (rep.q_form.violations != rep.r_form.violations) rep.consistent = false;
  return rep;
}

std::vector<State> construct_K_ctmc(const JumpModel& q, const DriftSpec& s) {
  if (!s.ball) throw ConfigError("construct_K: model supplies no ball enumerator");
  const StateFunction one = [](const State&) { return 1.0; };
  const StateFunction& slack2 = s.slack2 ? s.slack2 : one;
  const auto radius = std::max(s.n1, s.n2);
  return select_violators(s.ball(radius), s.ball(radius + 1), [&](const State& x) {
    return ctmc_drift_margin(q, s.g1, s.r, x) < 0.0 || ctmc_drift_margin(q, s.g2, slack2, x) < 0.0;
  });
}

DriftSpec embedded_spec(const JumpModel& q, const DriftSpec& s) {
  DriftSpec out = s;
  out.r = transform_reward(s.r, q);
  out.slack2 = transform_reward(s.slack2 ? s.slack2 : StateFunction([](const State&) { return 1.0; }), q);
  return out;
}

double ctmc_moment_bound(const JumpModel& q, const StateFunction& g3, const StateFunction& w,
                         const std::vector<State>& core) {
  double c = 0.0;
  for (const auto& x : core) {
    const double excess = -ctmc_drift_margin(q, g3, w, x);
    if (!std::isfinite(excess)) throw NumericalFailure("moment_bound: drift excess not finite at " + x.to_string());
    c = std::max(c, excess);
  }
  return c;
}

BoundReport ctmc_expectation_bounds(const Censoring& c, const JumpModel& q, const StateFunction& f,
                                    const StateFunction& r, const Vector& h1, const Vector& h2,
                                    const BoundOptions& options) {
  const Truncation& t = c.truncation();
  const Vector lambda = exit_rates(q, t);
  const Vector ft = t.evaluate(f).cwiseQuotient(lambda);
  const Vector rt = t.evaluate(r).cwiseQuotient(lambda);
  const Vector et = lambda.cwiseInverse();
  BoundReport rep = evaluate_reward_bounds(c, ft, rt, h1, et, h2, options);
  rep.provenance["process"] = "jump";
  return rep;
}

Vector jump_distribution(const Vector& pi_embedded, const Vector& lambda) {
  if (pi_embedded.size() != lambda.size()) throw ConfigError("jump_distribution: length mismatch");
  Vector nu = pi_embedded.cwiseQuotient(lambda);
  return nu / nu.sum();
}

}  // namespace mctrunc
