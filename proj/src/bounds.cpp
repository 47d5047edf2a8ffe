#include "mctrunc/bounds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mctrunc/dense.hpp"
#include "mctrunc/errors.hpp"

namespace mctrunc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_sizes(const KappaData& a, Index k, const char* what) {
  if (a.lower.size() != k || a.beta.size() != k) throw ConfigError(std::string(what) + ": vector length does not match K");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalFailure(std::string(what) + ": result is not finite");
}

}  // namespace

Vector overflow_beta(const Censoring& c, const Vector& h) {
  if ((h.array() < 0.0).any()) throw ConfigError("overflow_beta: h must be nonnegative");
  return c.kappa_lower(h);
}

KappaData kappa_data(const Censoring& c, const Vector& w, const Vector& h) {
  return KappaData{c.kappa_lower(w), overflow_beta(c, h)};
}

Vector kappa_upper(const Censoring& c, const Vector& w, const Vector& h) { return kappa_data(c, w, h).upper(); }

Interval singleton_bounds(const KappaData& r, const KappaData& den) {
  if (r.lower.size() != 1) throw AssumptionViolation("singleton_bounds: K is not a singleton");
  check_sizes(r, 1, "singleton_bounds");
  check_sizes(den, 1, "singleton_bounds");
  if (!(den.lower[0] > 0.0)) throw NumericalFailure("singleton_bounds: kappa_lower(z, den) is not positive");
  Interval out{r.lower[0] / (den.lower[0] + den.beta[0]), (r.lower[0] + r.beta[0]) / den.lower[0]};
  check_finite(out.lower, "singleton_bounds");
  check_finite(out.upper, "singleton_bounds");
  return out;
}

Interval minorization_bounds(const TauFamily& tau, const KappaData& r, const KappaData& den) {
  const Index k = tau.size();
  check_sizes(r, k, "minorization_bounds");
  check_sizes(den, k, "minorization_bounds");
  if (k == 1) return singleton_bounds(r, den);
  const Vector r_lo = tau.apply(r.lower);
  const Vector r_hi = tau.apply(r.upper());
  const Vector d_lo = tau.apply(den.lower);
  const Vector d_hi = tau.apply(den.upper());
  if (!(d_lo.minCoeff() > 0.0)) throw NumericalFailure("minorization_bounds: tau denominator is not positive");
  Interval out{r_lo.minCoeff() / d_hi.maxCoeff(), r_hi.maxCoeff() / d_lo.minCoeff()};
  check_finite(out.lower, "minorization_bounds");
  check_finite(out.upper, "minorization_bounds");
  return out;
}

double approx_error_bound(const Interval& bounds, StochasticizationMethod method) {
  if (method != StochasticizationMethod::row) {
    throw ConfigError("approx_error_bound: only valid for the row-normalized stochasticization");
  }
  return std::max(0.0, bounds.width());
}

double tv_bound_singleton(const KappaData& r, const KappaData& den, double approx) {
  check_sizes(r, 1, "tv_bound_singleton");
  check_sizes(den, 1, "tv_bound_singleton");
  if (!(den.lower[0] > 0.0)) throw NumericalFailure("tv_bound_singleton: kappa_lower(z, den) is not positive");
  const double v = 2.0 * std::max(r.beta[0] / den.lower[0], approx * den.beta[0] / den.lower[0]);
  check_finite(v, "tv_bound_singleton");
  return v;
}

double delta2_bound(const Matrix& t) {
  double best = 0.0;
  for (Index x = 0; x + 1 < t.rows(); ++x) {
    const auto rest = t.bottomRows(t.rows() - x - 1);
    const double m = (rest.rowwise() - t.row(x)).cwiseAbs().rowwise().sum().maxCoeff();
    best = std::max(best, m);
  }
  return std::min(best, 2.0);
}

double delta2_bound(const TauFamily& tau) { return delta2_bound(tau.matrix()); }

double delta1_bound(const Matrix& p1, const Matrix& g, const Matrix& f1, double delta) {
  const double a = ((p1 - g) * f1).cwiseAbs().rowwise().sum().maxCoeff();
  const double b = f1.cwiseAbs().rowwise().sum().maxCoeff();
  return a + std::max(0.0, 1.0 - delta) * b;
}

double ell_bound(const TauFamily& tau, const Vector& kappa_den_lower) {
  return tau.apply(kappa_den_lower).minCoeff();
}

double tv_bound_general(const GeneralTvInputs& in) {
  const Index k = in.pi.size();
  check_sizes(in.r, k, "tv_bound_general");
  check_sizes(in.den, k, "tv_bound_general");
  if (!(in.ell > 0.0)) throw NumericalFailure("tv_bound_general: ell is not positive");
  const double norm_den = in.den.upper().lpNorm<Eigen::Infinity>();
  const double norm_r = in.r.upper().lpNorm<Eigen::Infinity>();
  const double eps = (in.pi.dot(in.r.beta) + in.approx * in.pi.dot(in.den.beta) +
                      in.delta * (in.approx * norm_den + norm_r)) / in.ell;
  check_finite(eps, "tv_bound_general");
  return 2.0 * eps;
}

Interval signed_interval(const Interval& positive, const Interval& negative) {
  return Interval{positive.lower - negative.upper, positive.upper - negative.lower};
}

nlohmann::json BoundReport::to_json(bool include_vectors) const {
  nlohmann::json j;
  j["lower"] = lower;
  j["upper"] = upper;
  j["approx"] = approx;
  if (approx_error >= 0.0) j["approx_error"] = approx_error;
  j["tv_bound"] = tv_bound;
  j["delta"] = delta;
  j["ell"] = ell;
  j["interval_method"] = interval_method;
  j["stochasticization"] = stochasticization;
  j["delta_method"] = delta_method;
  j["beta1_max"] = beta1.size() ? beta1.maxCoeff() : 0.0;
  j["beta2_max"] = beta2.size() ? beta2.maxCoeff() : 0.0;
  if (include_vectors) {
    j["beta1"] = std::vector<double>(beta1.data(), beta1.data() + beta1.size());
    j["beta2"] = std::vector<double>(beta2.data(), beta2.data() + beta2.size());
  }
  j["timings"] = timings;
  j["provenance"] = provenance;
  return j;
}

BoundReport evaluate_bounds(const Censoring& c, const Vector& r, const Vector& h1, const Vector& den, const Vector& h2,
                            const BoundOptions& options) {
  BoundReport rep;
  auto t0 = Clock::now();
  const KappaData kr = kappa_data(c, r, h1);
  const KappaData kd = kappa_data(c, den, h2);
  rep.beta1 = kr.beta;
  rep.beta2 = kd.beta;
  const Stochasticization st = stochasticize(c, options.method);
  rep.stochasticization = to_string(options.method);
  rep.approx = approx_expectation(st.pi, kr.lower, kd.lower);
  rep.timings["stochasticize"] = seconds_since(t0);

  if (c.k_size() == 1 && options.singleton_when_possible) {
    t0 = Clock::now();
    const Interval iv = singleton_bounds(kr, kd);
    rep.lower = iv.lower;
    rep.upper = iv.upper;
    rep.interval_method = "singleton";
    rep.tv_bound = tv_bound_singleton(kr, kd, rep.approx);
    rep.delta = 0.0;
    rep.delta_method = "none";
    rep.ell = kd.lower[0];
    rep.approx_error = std::max(0.0, iv.width());
    rep.timings["bounds"] = seconds_since(t0);
    return rep;
  }

  t0 = Clock::now();
  const TauFamily tau(c);
  rep.timings["tau"] = seconds_since(t0);

  t0 = Clock::now();
  const Interval iv = minorization_bounds(tau, kr, kd);
  rep.lower = iv.lower;
  rep.upper = iv.upper;
  rep.interval_method = "minorization";
  if (options.method == StochasticizationMethod::row) {
    rep.approx_error = approx_error_bound(iv, options.method);
    rep.delta = delta2_bound(tau);
    rep.delta_method = "minorization";
  } else {
    const Matrix f1 = fundamental_matrix(st.p, st.pi);
    rep.delta = delta1_bound(st.p, c.G(), f1, c.delta());
    rep.delta_method = "perturbation";
  }
  rep.ell = ell_bound(tau, kd.lower);
  rep.tv_bound = tv_bound_general(GeneralTvInputs{st.pi, rep.approx, kr, kd, rep.delta, rep.ell});
  rep.timings["bounds"] = seconds_since(t0);
  return rep;
}

BoundReport evaluate_reward_bounds(const Censoring& c, const Vector& f, const Vector& r, const Vector& h1,
                                   const Vector& den, const Vector& h2, const BoundOptions& options) {
  if (f.size() != r.size()) throw ConfigError("evaluate_reward_bounds: reward length mismatch");
  for (Index i = 0; i < f.size(); ++i) {
    if (!(std::abs(f[i]) <= r[i])) {
      throw ConfigError("evaluate_reward_bounds: |f| exceeds the envelope r at " +
                        c.truncation().space.state_of(i).to_string());
    }
  }
  BoundReport rep = evaluate_bounds(c, r, h1, den, h2, options);
  if (f == r) return rep;

  const Vector beta1 = rep.beta1;
  const KappaData kd{c.kappa_lower(den), rep.beta2};
  const Vector fp = f.cwiseMax(0.0);
  const Vector fm = (-f).cwiseMax(0.0);
  const KappaData kp{c.kappa_lower(fp), beta1};
  const KappaData km{c.kappa_lower(fm), beta1};
  const Stochasticization st = stochasticize(c, options.method);
  rep.approx = approx_expectation(st.pi, kp.lower - km.lower, kd.lower);

  Interval ip, im;
  if (c.k_size() == 1 && options.singleton_when_possible) {
    ip = singleton_bounds(kp, kd);
    im = singleton_bounds(km, kd);
  } else {
    const TauFamily tau(c);
    ip = minorization_bounds(tau, kp, kd);
    im = minorization_bounds(tau, km, kd);
  }
  const Interval iv = signed_interval(ip, im);
  rep.lower = iv.lower;
  rep.upper = iv.upper;
  rep.approx_error = options.method == StochasticizationMethod::row ? std::max(0.0, iv.width()) : -1.0;
  return rep;
}

}  // namespace mctrunc
