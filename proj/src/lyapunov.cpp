#include "mctrunc/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mctrunc/errors.hpp"
#include "mctrunc/log.hpp"

namespace mctrunc {

namespace {

double finite_value(const StateFunction& f, const State& x, const char* what) {
  const double v = f(x);
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " is not finite at " + x.to_string());
  return v;
}

}  // namespace

double drift_margin(const ChainModel& model, const StateFunction& g, const StateFunction& slack, const State& x,
                    const StatePredicate& in_k) {
  std::vector<Transition> row;
  model.transitions(x, row);
  const double gx = finite_value(g, x, "g");
  double to_k = 0.0;
  double change = 0.0;
  for (const auto& tr : row) {
    if (tr.prob == 0.0) continue;
    if (in_k && in_k(tr.to)) {
      to_k += tr.prob;
    } else {
      change += tr.prob * (finite_value(g, tr.to, "g") - gx);
    }
  }
  return to_k * gx - change - finite_value(slack, x, "slack");
}

DriftReport verify_drift(const ChainModel& model, const StateFunction& g, const StateFunction& slack,
                         const StatePredicate& in_k, const std::vector<State>& region) {
  std::vector<State> sorted = region;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  DriftReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : sorted) {
    if (in_k && in_k(x)) continue;
    const double m = drift_margin(model, g, slack, x, in_k);
    ++report.checked;
    if (m < report.worst_margin) {
      report.worst_margin = m;
      report.worst_state = x;
    }
    if (m < 0.0) report.violations.push_back(x);
  }
  if (report.checked == 0) report.worst_margin = 0.0;
  return report;
}

std::vector<State> select_violators(const std::vector<State>& ball, const std::vector<State>& outer,
                                    const std::function<bool(const State&)>& violates) {
  std::vector<State> k;
  for (const auto& x : ball) {
    if (violates(x)) k.push_back(x);
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  if (!ball.empty() && k.size() == ball.size()) {
    std::vector<State> inner = ball;
    std::sort(inner.begin(), inner.end());
    bool shell_holds = false;
    for (const auto& x : outer) {
      if (!std::binary_search(inner.begin(), inner.end(), x) && !violates(x)) {
        shell_holds = true;
        break;
      }
    }
    if (!shell_holds) throw AssumptionViolation("construct_K: drift fails everywhere in and around the certified ball");
  }
  if (k.empty()) log_warning("construct_K: no drift violations inside the certified ball; K is empty");
  return k;
}

std::vector<State> construct_K(const ChainModel& model, const DriftSpec& spec) {
  if (!spec.ball) throw ConfigError("construct_K: model supplies no ball enumerator");
  const auto radius = std::max(spec.n1, spec.n2);
  return select_violators(spec.ball(radius), spec.ball(radius + 1), [&](const State& x) {
    return drift_margin(model, spec.g1, spec.r, x) < 0.0 || drift_margin(model, spec.g2, spec.slack2, x) < 0.0;
  });
}

Vector compute_h(const Truncation& t, const StateFunction& g) {
  Vector h = Vector::Zero(t.size());
  for (Index i = 0; i < t.size(); ++i) {
    double s = 0.0;
    for (const auto& tr : t.partition.boundary_rows[static_cast<std::size_t>(i)]) {
      s += tr.prob * finite_value(g, tr.to, "g");
    }
    h[i] = s;
  }
  return h;
}

double moment_bound(const ChainModel& model, const StateFunction& g3, const StateFunction& w,
                    const std::vector<State>& core) {
  double c = 0.0;
  std::vector<Transition> row;
  for (const auto& x : core) {
    row.clear();
    model.transitions(x, row);
    const double gx = finite_value(g3, x, "g3");
    double excess = finite_value(w, x, "w");
    for (const auto& tr : row) excess += tr.prob * (finite_value(g3, tr.to, "g3") - gx);
    if (!std::isfinite(excess)) throw NumericalFailure("moment_bound: drift excess not finite at " + x.to_string());
    c = std::max(c, excess);
  }
  return c;
}

std::vector<State> merge_regions(std::vector<State> a, const std::vector<State>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

LyapunovCertificate certify(const ChainModel& model, const Truncation& t, const DriftSpec& spec) {
  LyapunovCertificate cert;
  cert.g1 = spec.g1;
  cert.g2 = spec.g2;
  cert.r = spec.r;
  cert.slack2 = spec.slack2 ? spec.slack2 : StateFunction([](const State&) { return 1.0; });
  cert.n1 = spec.n1;
  cert.n2 = spec.n2;
  const auto& states = t.space.states();
  const StatePredicate in_k = [&](const State& x) { return t.space.in_k(x); };
  auto region1 = spec.ball ? merge_regions(spec.ball(spec.n1), states) : merge_regions(states, {});
  auto region2 = spec.ball ? merge_regions(spec.ball(spec.n2), states) : merge_regions(states, {});
  cert.region_size = merge_regions(region1, region2).size();
  cert.drift1 = verify_drift(model, cert.g1, cert.r, in_k, region1);
  cert.drift2 = verify_drift(model, cert.g2, cert.slack2, in_k, region2);
  cert.h1 = compute_h(t, cert.g1);
  cert.h2 = compute_h(t, cert.g2);
  return cert;
}

DriftSpec single_pair(const DriftSpec& spec, const StateFunction& g, std::int64_t radius) {
  DriftSpec out = spec;
  out.g1 = g;
  out.g2 = g;
  const StateFunction r = spec.r;
  const StateFunction s2 = spec.slack2 ? spec.slack2 : StateFunction([](const State&) { return 1.0; });
  out.r = [r, s2](const State& x) { return std::max(r(x), s2(x)); };
  out.slack2 = out.r;
  out.n1 = radius;
  out.n2 = radius;
  return out;
}

namespace {

nlohmann::json report_json(const DriftReport& r) {
  nlohmann::json j;
  j["checked"] = r.checked;
  j["worst_margin"] = r.worst_margin;
  j["worst_state"] = r.worst_state.to_string();
  std::vector<std::string> v;
  for (const auto& s : r.violations) v.push_back(s.to_string());
  j["violations"] = v;
  return j;
}

}  // namespace

nlohmann::json LyapunovCertificate::to_json(const Truncation& t) const {
  nlohmann::json j;
  j["n1"] = n1;
  j["n2"] = n2;
  j["single_pair"] = single_pair;
  j["verified"] = verified();
  j["region_size"] = region_size;
  j["drift1"] = report_json(drift1);
  j["drift2"] = report_json(drift2);
  nlohmann::json values = nlohmann::json::array();
  for (Index i = 0; i < t.size(); ++i) {
    const auto& x = t.space.state_of(i);
    values.push_back({x.to_string(), g1(x), g2(x), h1[i], h2[i]});
  }
  j["values"] = {{"columns", {"state", "g1", "g2", "h1", "h2"}}, {"rows", values}};
  return j;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string LyapunovCertificate::hash(const Truncation& t) const { return fnv1a_hex(to_json(t).dump()); }

}  // namespace mctrunc
