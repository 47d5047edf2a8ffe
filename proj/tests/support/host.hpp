#pragma once

// A finite chain given by a dense matrix, exposed through the model
// interface so that the full pipeline can be run against dense oracles.

#include <string>

#include "mctrunc/model.hpp"
#include "mctrunc/state_space.hpp"

namespace host {

class MatrixChain : public mctrunc::ChainModel {
 public:
  explicit MatrixChain(Eigen::MatrixXd p) : p_(std::move(p)) {}
  std::string name() const override { return "matrix"; }
  std::size_t dimension() const override { return 1; }
  mctrunc::State seed() const override { return mctrunc::State{0}; }
  void transitions(const mctrunc::State& x, std::vector<mctrunc::Transition>& out) const override {
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      if (p_(x[0], j) > 0.0) out.push_back({mctrunc::State{j}, p_(x[0], j)});
    }
  }
  const Eigen::MatrixXd& matrix() const { return p_; }

 private:
  Eigen::MatrixXd p_;
};

/// A finite jump process given by a dense rate matrix (diagonal ignored).
class RateChain : public mctrunc::JumpModel {
 public:
  explicit RateChain(Eigen::MatrixXd q) : q_(std::move(q)) {}
  std::string name() const override { return "rates"; }
  std::size_t dimension() const override { return 1; }
  mctrunc::State seed() const override { return mctrunc::State{0}; }
  void rates(const mctrunc::State& x, std::vector<mctrunc::Rate>& out) const override {
    for (Eigen::Index j = 0; j < q_.cols(); ++j) {
      if (j != x[0] && q_(x[0], j) > 0.0) out.push_back({mctrunc::State{j}, q_(x[0], j)});
    }
  }
  const Eigen::MatrixXd& matrix() const { return q_; }

 private:
  Eigen::MatrixXd q_;
};

/// K = {0..k-1}, A = {0..a-1}.
inline mctrunc::Truncation truncate(const MatrixChain& m, int k, int a) {
  return mctrunc::enumerate(
      m, [a](const mctrunc::State& s) { return s[0] < a; }, [k](const mctrunc::State& s) { return s[0] < k; });
}

/// Certificate data on a finite host with K = {0..k-1}: g = scale (I - P_CC)^{-1} w
/// on the complement C of K and 0 on K, so that the drift inequality holds with
/// slack (scale - 1) w.
inline Eigen::VectorXd host_lyapunov(const Eigen::MatrixXd& p, int k, const Eigen::VectorXd& w, double scale) {
  const auto n = p.rows();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  if (k == n) return g;
  const auto m = n - k;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - p.bottomRightCorner(m, m);
  g.tail(m) = scale * a.fullPivLu().solve(Eigen::VectorXd(w.tail(m)));
  return g;
}

inline mctrunc::StateFunction table(const Eigen::VectorXd& v) {
  return [v](const mctrunc::State& s) { return v[s[0]]; };
}

}  // namespace host
