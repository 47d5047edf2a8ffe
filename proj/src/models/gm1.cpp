#include "mctrunc/models/gm1.hpp"

#include <algorithm>
#include <cmath>

#include "mctrunc/errors.hpp"

namespace mctrunc {

namespace {

constexpr double kMassCutoff = 1e-300;

double coordinate(const State& x) {
  if (x.dim() != 1 || x[0] < 0) throw ConfigError("gm1: state must be a nonnegative integer, got " + x.to_string());
  return static_cast<double>(x[0]);
}

}  // namespace

GM1Model::GM1Model() : GM1Model(Params{}) {}

GM1Model::GM1Model(Params p) : p_(p) {
  const double m = p_.mu * p_.b;
  if (!(p_.mu > 0.0) || !(p_.b > 0.0) || !std::isfinite(m)) throw ConfigError("gm1: mu and b must be positive");
  if (m > 700.0) throw ConfigError("gm1: mu * b too large for the Poisson recursion");
  // Poisson(m) masses by forward recursion until they drop below the cutoff.
  std::vector<double> pmf{std::exp(-m)};
  for (std::int64_t k = 1;; ++k) {
    const double next = pmf.back() * m / static_cast<double>(k);
    if (static_cast<double>(k) > m && next < kMassCutoff) break;
    pmf.push_back(next);
  }
  // beta_i = P(N >= i + 1) / m, tails summed from the small end.
  const auto n = pmf.size();
  std::vector<double> upper(n + 1, 0.0);
  for (auto k = n; k-- > 0;) upper[k] = upper[k + 1] + pmf[k];
  beta_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) beta_[i] = upper[i + 1] / m;
  while (beta_.size() > 1 && beta_.back() == 0.0) beta_.pop_back();
  tail_.assign(beta_.size() + 1, 0.0);
  for (auto i = beta_.size(); i-- > 0;) tail_[i] = tail_[i + 1] + beta_[i];
}

double GM1Model::beta(std::int64_t i) const {
  if (i < 0) throw ConfigError("gm1_beta: index must be nonnegative");
  return i <= support() ? beta_[static_cast<std::size_t>(i)] : 0.0;
}

double GM1Model::beta_tail(std::int64_t i) const {
  if (i < 0) return 1.0;
  return i <= support() ? tail_[static_cast<std::size_t>(i)] : 0.0;
}

void GM1Model::transitions(const State& x, std::vector<Transition>& out) const {
  const auto xv = static_cast<std::int64_t>(coordinate(x));
  const std::int64_t jmax = std::min(xv, support());
  for (std::int64_t j = 0; j <= jmax; ++j) {
    const double b = beta_[static_cast<std::size_t>(j)];
    if (b > 0.0) out.push_back({State{xv + 1 - j}, b});
  }
  const double to_zero = beta_tail(xv + 1);
  if (to_zero > 0.0) out.push_back({State{0}, to_zero});
}

double GM1Model::moment(int k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < beta_.size(); ++j) s += std::pow(static_cast<double>(j), k) * beta_[j];
  return s;
}

double GM1Model::centered_moment(int k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < beta_.size(); ++j) s += std::pow(1.0 - static_cast<double>(j), k) * beta_[j];
  return s;
}

double gm1_beta(std::int64_t i, double mu, double b) { return GM1Model(GM1Model::Params{mu, b}).beta(i); }

double GM1Exact::pmf(std::int64_t x) const {
  return one_minus_theta * std::exp(static_cast<double>(x) * std::log1p(-one_minus_theta));
}

namespace {

// (e^{-s} - 1 + s) / s^2 - 1/m with the constant term combined exactly for small s.
double root_function(double s, double m) {
  if (s < 0.5) {
    double sum = (m - 2.0) / (2.0 * m);
    double term = 1.0 / 2.0;
    for (int k = 1; k < 40; ++k) {
      term *= -s / static_cast<double>(k + 2);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::expm1(-s) + s) / (s * s) - 1.0 / m;
}

}  // namespace

GM1Exact gm1_exact(const GM1Model::Params& p) {
  const double m = p.mu * p.b;
  // With uniform interarrivals the root equation in s = xi b reads
  // (e^{-s} - 1 + s) / s^2 = 1 / (mu b); a root in (0, mu b) exists iff mu b > 2.
  double lo = 0.0, hi = m;
  if (!(root_function(hi, m) < 0.0) || !(m > 2.0)) {
    throw AssumptionViolation("gm1_exact: no sign change; the queue is not stable (E V <= 1)");
  }
  for (int it = 0; it < 2000 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (root_function(mid, m) > 0.0 ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  GM1Exact out;
  out.xi = s / p.b;
  out.one_minus_theta = s / m;
  out.theta = 1.0 - out.one_minus_theta;
  out.residual = root_function(s, m);
  return out;
}

std::vector<State> gm1_ball(std::int64_t radius) {
  std::vector<State> out;
  for (std::int64_t x = 0; x < radius; ++x) out.push_back(State{x});
  return out;
}

GM1Lyapunov gm1_lyapunov(const GM1Model& model, double c1, double c2, double c3) {
  GM1Lyapunov out;
  out.c1 = c1;
  out.c2 = c2;
  out.c3 = c3;
  const double ev = model.moment(1);
  const double q = ev - 1.0;
  if (!(q > 0.0)) throw AssumptionViolation("gm1_lyapunov: E V <= 1, the queue is not positive recurrent");
  const double den1 = 2.0 * c1 * q - 1.0;
  const double den2 = c2 * q - 1.0;
  if (!(den1 > 0.0) || !(den2 > 0.0)) throw AssumptionViolation("gm1_lyapunov: c1 or c2 too small for E V");
  out.n1 = static_cast<std::int64_t>(std::ceil(c1 * model.centered_moment(2) / den1));
  out.n2 = static_cast<std::int64_t>(std::ceil(std::sqrt(c2 * model.moment(3) / den2)));

  out.a3 = 4.0 * c3 * (1.0 - ev) + 1.0;
  out.a2 = 6.0 * c3 * model.centered_moment(2);
  out.a1 = 4.0 * c3 * model.centered_moment(3);
  out.a0 = c3 * model.centered_moment(4);
  if (!(out.a3 < 0.0)) throw AssumptionViolation("gm1_lyapunov: c3 too small, leading drift coefficient is nonnegative");
  const double ratio = std::max({std::abs(out.a2), std::abs(out.a1), std::abs(out.a0)}) / std::abs(out.a3);
  out.n3 = static_cast<std::int64_t>(std::ceil(1.0 + ratio));

  out.spec.g1 = [c1](const State& x) { const double v = coordinate(x); return c1 * v * v; };
  out.spec.g2 = [c2](const State& x) { return c2 * coordinate(x); };
  out.spec.r = [](const State& x) { return coordinate(x); };
  out.spec.slack2 = [](const State&) { return 1.0; };
  out.spec.n1 = out.n1;
  out.spec.n2 = out.n2;
  out.spec.ball = gm1_ball;
  out.g3 = [c3](const State& x) { const double v = coordinate(x); return c3 * v * v * v * v; };
  out.w = [](const State& x) { const double v = coordinate(x); return v * v * v; };
  return out;
}

}  // namespace mctrunc
