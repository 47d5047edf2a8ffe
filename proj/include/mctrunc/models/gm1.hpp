#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mctrunc/lyapunov.hpp"
#include "mctrunc/model.hpp"

namespace mctrunc {

/// The embedded chain of a G/M/1 queue observed at arrival epochs, with
/// exponential(mu) service and interarrival law uniform on [0, b]:
/// P(x, y) = beta_{x+1-y} for 1 <= y <= x+1 and P(x, 0) the complement.
class GM1Model : public ChainModel {
 public:
  struct Params {
    double mu = 1.0;
    double b = 2.01;
  };

  GM1Model();
  explicit GM1Model(Params p);

  std::string name() const override { return "gm1"; }
  std::size_t dimension() const override { return 1; }
  State seed() const override { return State{0}; }
  void transitions(const State& x, std::vector<Transition>& out) const override;

  const Params& params() const { return p_; }
  /// beta_i = P(Poisson(mu b) >= i + 1) / (mu b); zero beyond the support cutoff.
  double beta(std::int64_t i) const;
  /// sum_{j >= i} beta_j.
  double beta_tail(std::int64_t i) const;
  /// Largest index with a stored nonzero mass.
  std::int64_t support() const { return static_cast<std::int64_t>(beta_.size()) - 1; }

  /// E V^k and E (1 - V)^k for V with mass function beta.
  double moment(int k) const;
  double centered_moment(int k) const;

 private:
  Params p_;
  std::vector<double> beta_;
  std::vector<double> tail_;  // tail_[i] = sum_{j >= i} beta_j, one extra zero at the end
};

/// beta_i for the uniform [0, b] interarrival law, standalone.
double gm1_beta(std::int64_t i, double mu = 1.0, double b = 2.01);

/// The geometric equilibrium pi(x) = (1 - theta) theta^x.
struct GM1Exact {
  double xi = 0.0;
  double theta = 0.0;
  double one_minus_theta = 0.0;  // xi / mu, kept separately for accuracy
  double residual = 0.0;         // of the root equation at xi

  double pmf(std::int64_t x) const;
  double mean() const { return theta / one_minus_theta; }
};

/// Solves 1 = mu/(mu - xi) E exp(-xi T) for xi in (0, mu) by bisection.
GM1Exact gm1_exact(const GM1Model::Params& p = {});

struct GM1Lyapunov {
  double c1 = 300.0, c2 = 300.0, c3 = 300.0;
  std::int64_t n1 = 0, n2 = 0, n3 = 0;
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;  // coefficients of the g3 drift polynomial
  DriftSpec spec;                                  // g1 = c1 x^2, g2 = c2 x, r = x
  StateFunction g3, w;                             // c3 x^4 and x^3
};

GM1Lyapunov gm1_lyapunov(const GM1Model& model, double c1 = 300.0, double c2 = 300.0, double c3 = 300.0);

/// {0, ..., radius - 1}.
std::vector<State> gm1_ball(std::int64_t radius);

}  // namespace mctrunc
