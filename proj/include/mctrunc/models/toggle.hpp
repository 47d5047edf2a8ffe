#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mctrunc/lyapunov.hpp"
#include "mctrunc/model.hpp"

namespace mctrunc {

/// Symmetric genetic toggle switch: type-i proteins are made at rate
/// lambda / (1 + x_j) and each molecule decays at rate mu.
class ToggleSwitchModel : public JumpModel {
 public:
  ToggleSwitchModel(double lambda, double mu);

  std::string name() const override;
  std::size_t dimension() const override { return 2; }
  State seed() const override { return State{0, 0}; }
  void rates(const State& x, std::vector<Rate>& out) const override;

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  /// Positive root of mu x^2 + mu x - lambda = 0.
  double mode() const { return mode_; }
  /// The integer closest to mode(); the Lyapunov functions are centred there.
  std::int64_t centre() const { return centre_; }

 private:
  double lambda_, mu_, mode_;
  std::int64_t centre_;
};

/// Q-form drift data: (Q g1) <= -r and (Q g2) <= -1 off K for x1 + x2 >= n1, n2.
struct ToggleLyapunov {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  std::int64_t n1 = 0, n2 = 0;
  double alpha = 4.0, c3 = 1.0;
  std::int64_t n3 = 0;
  DriftSpec spec;         // g1, g2, r = x1 + x2, slack2 = 1
  StateFunction g3, w;    // alpha g1 and (x1 + x2)^2
};

ToggleLyapunov toggle_lyapunov(const ToggleSwitchModel& model, double alpha = 4.0);

/// {x in Z_+^2 : x1 + x2 < radius}.
std::vector<State> simplex_ball(std::int64_t radius);

}  // namespace mctrunc
