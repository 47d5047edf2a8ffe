#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "mctrunc/censor.hpp"
#include "mctrunc/linalg.hpp"

namespace mctrunc {

/// Cycle-reward bounds over K for a reward w with 0 <= w <= envelope:
/// kappa_lower(w) <= kappa(w) <= kappa_lower(w) + beta, where beta is the
/// certificate's overflow term for the envelope.
struct KappaData {
  Vector lower;
  Vector beta;
  Vector upper() const { return lower + beta; }
};

/// beta(x) = h(x) + (P12 (I - P22)^{-1} h2)(x) over K, for h over A.
Vector overflow_beta(const Censoring& c, const Vector& h);

/// kappa_lower(w) and the overflow term of `h`.
KappaData kappa_data(const Censoring& c, const Vector& w, const Vector& h);

/// kappa_lower(w) + beta(h), the certified upper bound on kappa(w).
Vector kappa_upper(const Censoring& c, const Vector& w, const Vector& h);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  bool contains(double v, double slack = 0.0) const { return v >= lower - slack && v <= upper + slack; }
};

/// K = {z}: kappa_lower(z, r) / kappa_upper(z, den) <= pi r <= kappa_upper(z, r) / kappa_lower(z, den).
Interval singleton_bounds(const KappaData& r, const KappaData& den);

/// min_x tau_x kappa_lower(r) / max_x tau_x kappa_upper(den) <= pi r
///   <= max_x tau_x kappa_upper(r) / min_x tau_x kappa_lower(den).
Interval minorization_bounds(const TauFamily& tau, const KappaData& r, const KappaData& den);

/// The width of the minorization interval bounds |pi_2(r) - pi r|; not valid
/// for the Perron-Frobenius stochasticization.
double approx_error_bound(const Interval& bounds, StochasticizationMethod method);

/// 2 max(beta1(z) / kappa_lower(z, den), approx beta2(z) / kappa_lower(z, den)).
double tv_bound_singleton(const KappaData& r, const KappaData& den, double approx);

/// max_{x, y} sum_z |tau_x(z) - tau_y(z)|.
double delta2_bound(const TauFamily& tau);
double delta2_bound(const Matrix& tau_rows);

/// ||(P1 - G) F1||_inf + (1 - delta) ||F1||_inf.
double delta1_bound(const Matrix& p1, const Matrix& g, const Matrix& f1, double delta);

/// A lower bound on pi_K kappa(den): min_x tau_x kappa_lower(den).
double ell_bound(const TauFamily& tau, const Vector& kappa_den_lower);

struct GeneralTvInputs {
  Vector pi;          // pi_i over K
  double approx = 0;  // pi_i-based approximation of pi r
  KappaData r, den;
  double delta = 0;   // bound on ||pi_i - pi_K||_1
  double ell = 0;     // lower bound on pi_K kappa(den)
};

/// 2 eps with eps = [pi beta1 + approx pi beta2
///                   + Delta (approx ||kappa_upper(den)||_inf + ||kappa_upper(r)||_inf)] / ell.
double tv_bound_general(const GeneralTvInputs& in);

/// Bounds on pi f for a signed f with |f| <= r, from the bounds on f+ and f-.
Interval signed_interval(const Interval& positive, const Interval& negative);

struct BoundReport {
  double lower = 0.0, upper = 0.0;
  double approx = 0.0;
  double approx_error = -1.0;  // negative when not applicable
  double tv_bound = 0.0;       // on ||pi_i* - pi||_r
  double delta = 0.0;
  double ell = 0.0;
  Vector beta1, beta2;
  std::string interval_method;  // singleton | minorization
  std::string stochasticization;
  std::string delta_method;     // none | minorization | perturbation
  std::map<std::string, double> timings;  // seconds per stage
  std::map<std::string, std::string> provenance;

  nlohmann::json to_json(bool include_vectors = false) const;
};

struct BoundOptions {
  StochasticizationMethod method = StochasticizationMethod::row;
  /// Use the singleton formulas when |K| = 1.
  bool singleton_when_possible = true;
};

/// Full assembly for a reward r (0 <= r, certified by h1) and a denominator
/// reward den (e, or 1/lambda for jump processes, certified by h2), all over A.
BoundReport evaluate_bounds(const Censoring& c, const Vector& r, const Vector& h1, const Vector& den, const Vector& h2,
                            const BoundOptions& options = {});

/// Bounds on pi f for a reward with |f| <= r: the interval and the
/// approximation refer to f (split into f+ and f- when signed), the TV bound
/// to the envelope r.
BoundReport evaluate_reward_bounds(const Censoring& c, const Vector& f, const Vector& r, const Vector& h1,
                                   const Vector& den, const Vector& h2, const BoundOptions& options = {});

}  // namespace mctrunc
