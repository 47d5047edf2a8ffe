#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mctrunc/dense.hpp"
#include "mctrunc/linalg.hpp"
#include "mctrunc/state_space.hpp"

namespace mctrunc {

/// The truncation-based lower approximation G of the censored chain on K,
/// G = P11 + P12 (I - P22)^{-1} P21, together with the solves against
/// I - P22 that every downstream quantity is built from.
///
/// Row deficits d(x) = 1 - sum_y G(x, y) are computed directly as the
/// probability of leaving A before returning to K, so they stay accurate when
/// they are far below machine epsilon.
class Censoring {
 public:
  struct Options {
    int threads = 1;
    /// Reject a reducible G (the approximations need a single class on K).
    bool require_irreducible = true;
  };

  explicit Censoring(const Truncation& t);
  Censoring(const Truncation& t, Options options);

  const Truncation& truncation() const { return *t_; }
  const Blocks& blocks() const { return b_; }
  Index k_size() const { return t_->k_size(); }

  const Matrix& G() const { return g_; }
  /// n(x) = sum_y G(x, y).
  const Vector& n() const { return n_; }
  /// d(x) = P_x(leave A before returning to K).
  const Vector& deficit() const { return d_; }
  /// delta = min_x n(x).
  double delta() const { return n_.minCoeff(); }

  /// (I - P22)^{-1} w over A'.
  Vector middle_solve(const Vector& w2) const;
  /// v (I - P22)^{-1} for a row vector v over A'.
  Vector middle_solve_transpose(const Vector& v2) const;

  /// kappa_lower(x, w) = w(x) + (P12 (I - P22)^{-1} w2)(x), x in K, for w over A.
  Vector kappa_lower(const Vector& w) const;
  /// Cached variant keyed by a reward identifier.
  Vector kappa_lower(const std::string& id, const Vector& w) const;

  /// pi P12 (I - P22)^{-1}: expected visits to A' states during a K-cycle
  /// started from the distribution pi on K.
  Vector occupation(const Vector& pi) const;

 private:
  const Truncation* t_;
  Options options_;
  Blocks b_;
  std::optional<MMatrixLU> lu22_;
  Matrix g_;
  Vector n_, d_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, Vector> kappa_cache_;
};

enum class StochasticizationMethod { row, perron };

std::string to_string(StochasticizationMethod m);

struct Stochasticization {
  StochasticizationMethod method = StochasticizationMethod::row;
  Matrix p;   // stochastic matrix on K
  Vector pi;  // its stationary distribution
  std::optional<PerronEigenpair> perron;
};

/// P2(x, y) = G(x, y) / n(x).
Stochasticization stochasticize_row(const Matrix& g);
Stochasticization stochasticize_row(const Censoring& c);
/// P1(x, y) = G(x, y) h(y) / (lambda h(x)), pi1 = nu o h.
Stochasticization stochasticize_pf(const Matrix& g, const Vector& deficit = Vector());
Stochasticization stochasticize_pf(const Censoring& c);
Stochasticization stochasticize(const Censoring& c, StochasticizationMethod m);

/// pi kappa_lower(r) / pi kappa_lower(den).
double approx_expectation(const Vector& pi, const Vector& kappa_r, const Vector& kappa_den);

/// The probability over A induced by pi on K: pi*(x) is proportional to
/// den(x) times the expected visits to x in a K-cycle started from pi and
/// stopped on leaving A. `den` defaults to one everywhere.
Vector approx_distribution(const Censoring& c, const Vector& pi, const Vector& den = Vector());

/// nu_e = delta_z + nu_e H over A, normalized; H the A x A block.
Vector exit_approximation(const Truncation& t, Index z);

struct ConditionedChain {
  Vector u;                       // P_x(T_K < T) over A
  SparseMatrix r;                 // over A; rows with u = 0 are empty
  std::vector<bool> in_s_prime;   // u > 0
  std::vector<bool> in_closed;    // the closed class containing K
  Vector pi3;                     // over A, zero off the closed class
};

/// The chain conditioned to return to K before leaving A, and its
/// stationary distribution.
ConditionedChain conditioned_chain(const Censoring& c);

/// The distributions tau_x = row x of (I - G)^{-1}, normalized, computed
/// through I - G_hat where G_hat deletes the row and column of one state z.
class TauFamily {
 public:
  TauFamily(const Matrix& g, const Vector& deficit);
  TauFamily(const Matrix& g, const Vector& deficit, Index deleted_state);
  explicit TauFamily(const Censoring& c);

  Index size() const { return g_.rows(); }
  Index deleted_state() const { return z_; }
  /// 1 - G(z, z) - G(z, K_hat) (I - G_hat)^{-1} G(K_hat, z), computed in a
  /// cancellation-free form.
  double denominator() const { return den_; }

  /// (tau_x q : x in K).
  Vector apply(const Vector& q) const;
  /// Rows tau_x as a dense matrix.
  Matrix matrix() const;

 private:
  Vector scaled_solve(const Vector& q) const;
  void init(Index z);

  Matrix g_;
  Vector d_;
  Index z_ = 0;
  std::vector<Index> rest_;  // K_hat in order
  std::optional<MMatrixLU> lu_;
  Vector u_;
  Vector scaled_e_;
  double den_ = 0.0;
};

/// Default deleted state: argmax n(x) (equivalently argmin d(x)), lowest index on ties.
Index default_deleted_state(const Vector& deficit);

struct ClassReport {
  ComponentLabels classes;
  Index closed_count = 0;
  Index transient_count = 0;
  bool irreducible = false;
};

/// Strongly connected components of G with closed/transient labels; warns
/// when more than one closed class is present.
ClassReport communicating_classes_diagnostic(const Matrix& g);

}  // namespace mctrunc
