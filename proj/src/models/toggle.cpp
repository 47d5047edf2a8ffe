#include "mctrunc/models/toggle.hpp"

#include <cmath>
#include <sstream>

#include "mctrunc/errors.hpp"

namespace mctrunc {

namespace {

void check_state(const State& x) {
  if (x.dim() != 2 || x[0] < 0 || x[1] < 0) throw ConfigError("toggle: state must lie in Z_+^2, got " + x.to_string());
}

}  // namespace

ToggleSwitchModel::ToggleSwitchModel(double lambda, double mu) : lambda_(lambda), mu_(mu) {
  if (!(lambda > 0.0) || !(mu > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu)) {
    throw ConfigError("toggle: lambda and mu must be positive and finite");
  }
  mode_ = (-1.0 + std::sqrt(1.0 + 4.0 * lambda / mu)) / 2.0;
  if (mode_ < 0.5) {
    throw AssumptionViolation("toggle: the drift constants require x* >= 1/2, got x* = " + std::to_string(mode_));
  }
  centre_ = std::llround(mode_);
}

std::string ToggleSwitchModel::name() const {
  std::ostringstream s;
  s << "toggle(" << lambda_ << "," << mu_ << ")";
  return s.str();
}

void ToggleSwitchModel::rates(const State& x, std::vector<Rate>& out) const {
  check_state(x);
  const auto x1 = x[0], x2 = x[1];
  out.push_back({State{x1 + 1, x2}, lambda_ / (1.0 + static_cast<double>(x2))});
  out.push_back({State{x1, x2 + 1}, lambda_ / (1.0 + static_cast<double>(x1))});
  if (x1 > 0) out.push_back({State{x1 - 1, x2}, mu_ * static_cast<double>(x1)});
  if (x2 > 0) out.push_back({State{x1, x2 - 1}, mu_ * static_cast<double>(x2)});
}

std::vector<State> simplex_ball(std::int64_t radius) {
  std::vector<State> out;
  for (std::int64_t x1 = 0; x1 < radius; ++x1) {
    for (std::int64_t x2 = 0; x1 + x2 < radius; ++x2) out.push_back(State{x1, x2});
  }
  return out;
}

ToggleLyapunov toggle_lyapunov(const ToggleSwitchModel& model, double alpha) {
  ToggleLyapunov out;
  const double lambda = model.lambda(), mu = model.mu();
  const double xs = static_cast<double>(model.centre());
  out.c0 = 2.0 * lambda;
  out.c1 = 1.0 + 2.0 * lambda + 2.0 * mu * (2.0 * xs + 1.0);
  out.c2 = 2.0 * mu;
  out.n1 = static_cast<std::int64_t>(
      std::ceil((out.c1 + std::sqrt(out.c1 * out.c1 + 4.0 * out.c2 * out.c0 / 2.0)) / out.c2));
  out.n2 = static_cast<std::int64_t>(std::ceil((2.0 * lambda + 4.0 * mu * xs + 1.0) / mu));

  out.alpha = alpha;
  out.c3 = 1.0;
  const double lead = alpha * out.c2 / 2.0 - out.c3;
  if (!(alpha > 1.0) || !(lead > 0.0)) throw ConfigError("toggle_lyapunov: need alpha > 1 and alpha mu > 1");
  out.n3 = static_cast<std::int64_t>(std::ceil(
      (alpha * out.c1 + std::sqrt(alpha * alpha * out.c1 * out.c1 + 4.0 * lead * alpha * out.c0)) / (2.0 * lead)));

  const auto g1 = [xs](const State& x) {
    const double a = static_cast<double>(x[0]) - xs, b = static_cast<double>(x[1]) - xs;
    return a * a + b * b;
  };
  out.spec.g1 = g1;
  out.spec.g2 = [xs](const State& x) {
    return std::abs(static_cast<double>(x[0]) - xs) + std::abs(static_cast<double>(x[1]) - xs);
  };
  out.spec.r = [](const State& x) { return static_cast<double>(x[0] + x[1]); };
  out.spec.slack2 = [](const State&) { return 1.0; };
  out.spec.n1 = out.n1;
  out.spec.n2 = out.n2;
  out.spec.ball = simplex_ball;
  out.g3 = [g1, alpha](const State& x) { return alpha * g1(x); };
  out.w = [](const State& x) {
    const double s = static_cast<double>(x[0] + x[1]);
    return s * s;
  };
  return out;
}

}  // namespace mctrunc
