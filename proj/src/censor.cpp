#include "mctrunc/censor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "mctrunc/errors.hpp"
#include "mctrunc/log.hpp"

namespace mctrunc {

Censoring::Censoring(const Truncation& t) : Censoring(t, Options{}) {}

Censoring::Censoring(const Truncation& t, Options options) : t_(&t), options_(options), b_(make_blocks(t)) {
  const Index k = t.k_size();
  const Index m = t.a_prime_size();
  if (m > 0) lu22_.emplace(b_.p22, Vector(b_.to_k + b_.exit_a_prime));

  g_ = Matrix(b_.p11);
  d_ = b_.exit_k;
  if (m > 0) {
    const Matrix p21 = Matrix(b_.p21);
    const int threads = std::max(1, std::min<int>(options_.threads, static_cast<int>(k)));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    auto work = [&](int tid) {
      try {
        for (Index j = tid; j < k; j += threads) {
          const Vector col = p21.col(j);
          if (col.isZero(0.0)) continue;
          g_.col(j) += b_.p12 * lu22_->solve(col);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(tid)] = std::current_exception();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int tid = 0; tid < threads; ++tid) pool.emplace_back(work, tid);
      for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    d_ += b_.p12 * lu22_->solve(b_.exit_a_prime);
  }
  n_ = g_.rowwise().sum();

  if (options_.require_irreducible && strongly_connected_components(g_).count != 1) {
    throw AssumptionViolation("G is reducible on K: every state of K must reach every other within A");
  }
}

Vector Censoring::middle_solve(const Vector& w2) const {
  if (w2.size() != t_->a_prime_size()) throw ConfigError("middle_solve: vector length does not match A'");
  if (!lu22_) return Vector(0);
  return lu22_->solve(w2);
}

Vector Censoring::middle_solve_transpose(const Vector& v2) const {
  if (v2.size() != t_->a_prime_size()) throw ConfigError("middle_solve_transpose: vector length does not match A'");
  if (!lu22_) return Vector(0);
  return lu22_->solve_transpose(v2);
}

Vector Censoring::kappa_lower(const Vector& w) const {
  const Index k = t_->k_size();
  const Index m = t_->a_prime_size();
  if (w.size() != k + m) throw ConfigError("kappa_lower: reward length does not match A");
  Vector out = w.head(k);
  if (m > 0) out += b_.p12 * middle_solve(w.tail(m));
  return out;
}

Vector Censoring::kappa_lower(const std::string& id, const Vector& w) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = kappa_cache_.find(id);
    if (it != kappa_cache_.end()) return it->second;
  }
  Vector v = kappa_lower(w);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  kappa_cache_.emplace(id, v);
  return v;
}

Vector Censoring::occupation(const Vector& pi) const {
  if (pi.size() != t_->k_size()) throw ConfigError("occupation: distribution length does not match K");
  if (t_->a_prime_size() == 0) return Vector(0);
  return middle_solve_transpose(b_.p12.transpose() * pi);
}

std::string to_string(StochasticizationMethod m) { return m == StochasticizationMethod::row ? "row" : "perron"; }

Stochasticization stochasticize_row(const Matrix& g) {
  const Vector n = g.rowwise().sum();
  for (Index i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0)) {
      throw AssumptionViolation("row " + std::to_string(i) + " of G is zero: K is not reachable from it within A");
    }
  }
  Stochasticization s;
  s.method = StochasticizationMethod::row;
  s.p = n.cwiseInverse().asDiagonal() * g;
  s.pi = stationary_small(s.p);
  return s;
}

Stochasticization stochasticize_row(const Censoring& c) {
  for (Index i = 0; i < c.k_size(); ++i) {
    if (!(c.n()[i] > 0.0)) {
      throw AssumptionViolation("state " + c.truncation().space.state_of(i).to_string() +
                                " cannot return to K without leaving A");
    }
  }
  return stochasticize_row(c.G());
}

Stochasticization stochasticize_pf(const Matrix& g, const Vector& deficit) {
  Stochasticization s;
  s.method = StochasticizationMethod::perron;
  PerronEigenpair pe = perron_eigenpair(g, deficit);
  const Index k = g.rows();
  s.p.resize(k, k);
  for (Index x = 0; x < k; ++x) {
    for (Index y = 0; y < k; ++y) s.p(x, y) = g(x, y) * pe.h[y] / (pe.lambda * pe.h[x]);
  }
  s.pi = pe.nu.cwiseProduct(pe.h);
  s.pi /= s.pi.sum();
  const double residual = (s.p.transpose() * s.pi - s.pi).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-10)) {
    throw NumericalFailure("stochasticize_pf: nu o h is not stationary for P1 (residual " +
                           std::to_string(residual) + ")");
  }
  s.perron = std::move(pe);
  return s;
}

Stochasticization stochasticize_pf(const Censoring& c) { return stochasticize_pf(c.G(), c.deficit()); }

Stochasticization stochasticize(const Censoring& c, StochasticizationMethod m) {
  return m == StochasticizationMethod::row ? stochasticize_row(c) : stochasticize_pf(c);
}

double approx_expectation(const Vector& pi, const Vector& kappa_r, const Vector& kappa_den) {
  return pi.dot(kappa_r) / pi.dot(kappa_den);
}

Vector approx_distribution(const Censoring& c, const Vector& pi, const Vector& den) {
  const Index k = c.k_size();
  const Index n = c.truncation().size();
  Vector mass(n);
  mass.head(k) = pi;
  mass.tail(n - k) = c.occupation(pi);
  if (den.size() == n) {
    mass = mass.cwiseProduct(den);
  } else if (den.size() != 0) {
    throw ConfigError("approx_distribution: weight length does not match A");
  }
  return mass / mass.sum();
}

Vector exit_approximation(const Truncation& t, Index z) {
  if (z < 0 || z >= t.size()) throw ConfigError("exit_approximation: state index out of range");
  MMatrixLU lu(t.p, t.exit_mass);
  Vector delta = Vector::Zero(t.size());
  delta[z] = 1.0;
  Vector nu = lu.solve_transpose(delta);
  return nu / nu.sum();
}

ConditionedChain conditioned_chain(const Censoring& c) {
  const Truncation& t = c.truncation();
  const Index k = t.k_size();
  const Index n = t.size();
  ConditionedChain out;
  out.u.resize(n);
  out.u.head(k) = c.n();
  if (n > k) out.u.tail(n - k) = c.middle_solve(c.blocks().to_k);

  out.in_s_prime.resize(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) out.in_s_prime[static_cast<std::size_t>(x)] = out.u[x] > 0.0;

  std::vector<Eigen::Triplet<double>> trip;
  for (Index x = 0; x < n; ++x) {
    if (!(out.u[x] > 0.0)) continue;
    for (SparseMatrix::InnerIterator it(t.p, x); it; ++it) {
      const Index y = it.col();
      if (y < k) {
        trip.emplace_back(x, y, it.value() / out.u[x]);
      } else if (out.u[y] > 0.0) {
        trip.emplace_back(x, y, it.value() * out.u[y] / out.u[x]);
      }
    }
  }
  out.r.resize(n, n);
  out.r.setFromTriplets(trip.begin(), trip.end());
  out.r.makeCompressed();

  const ComponentLabels cls = strongly_connected_components(out.r);
  const Index label = cls.label[0];
  for (Index x = 0; x < k; ++x) {
    if (cls.label[static_cast<std::size_t>(x)] != label) {
      throw AssumptionViolation("conditioned chain: K is not contained in a single communicating class");
    }
  }
  if (!cls.closed[static_cast<std::size_t>(label)]) {
    throw AssumptionViolation("conditioned chain: the class containing K is not closed");
  }
  out.in_closed.resize(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) out.in_closed[static_cast<std::size_t>(x)] = cls.label[static_cast<std::size_t>(x)] == label;

  const Stochasticization p2 = stochasticize_row(c);
  out.pi3.resize(n);
  out.pi3.head(k) = p2.pi;
  if (n > k) {
    const Vector v = c.occupation(p2.pi.cwiseQuotient(c.n()));
    out.pi3.tail(n - k) = out.u.tail(n - k).cwiseProduct(v);
  }
  for (Index x = 0; x < n; ++x) {
    if (!out.in_closed[static_cast<std::size_t>(x)]) out.pi3[x] = 0.0;
  }
  out.pi3 /= out.pi3.sum();

  const Vector moved = out.r.transpose() * out.pi3;
  const double residual = (moved - out.pi3).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-10)) {
    throw NumericalFailure("conditioned chain: stationarity residual " + std::to_string(residual));
  }
  return out;
}

Index default_deleted_state(const Vector& deficit) {
  Index best = 0;
  for (Index i = 1; i < deficit.size(); ++i) {
    if (deficit[i] < deficit[best]) best = i;
  }
  return best;
}

TauFamily::TauFamily(const Matrix& g, const Vector& deficit)
    : TauFamily(g, deficit, default_deleted_state(deficit)) {}

TauFamily::TauFamily(const Censoring& c) : TauFamily(c.G(), c.deficit()) {}

TauFamily::TauFamily(const Matrix& g, const Vector& deficit, Index deleted_state) : g_(g), d_(deficit) {
  if (g.rows() == 0 || g.rows() != g.cols() || deficit.size() != g.rows()) {
    throw ConfigError("TauFamily: G must be square, nonempty and match the deficit vector");
  }
  if (deleted_state < 0 || deleted_state >= g.rows()) throw ConfigError("TauFamily: deleted state out of range");
  init(deleted_state);
}

void TauFamily::init(Index z) {
  z_ = z;
  const Index k = g_.rows();
  rest_.clear();
  for (Index i = 0; i < k; ++i) {
    if (i != z) rest_.push_back(i);
  }
  const Index k1 = k - 1;
  u_ = Vector(k1);
  double coupling = 0.0;
  if (k1 > 0) {
    Matrix ghat(k1, k1);
    Vector chi(k1), dhat(k1), d_rest(k1);
    for (Index a = 0; a < k1; ++a) {
      const Index x = rest_[static_cast<std::size_t>(a)];
      for (Index b = 0; b < k1; ++b) ghat(a, b) = g_(x, rest_[static_cast<std::size_t>(b)]);
      chi[a] = g_(x, z);
      d_rest[a] = d_[x];
      dhat[a] = d_[x] + g_(x, z);
    }
    lu_.emplace(ghat, dhat);
    u_ = lu_->solve(chi);
    const Vector v = lu_->solve(d_rest);
    for (Index a = 0; a < k1; ++a) coupling += g_(z, rest_[static_cast<std::size_t>(a)]) * v[a];
  }
  den_ = d_[z] + coupling;
  if (!std::isfinite(den_) || den_ < 0.0 || (den_ == 0.0 && d_.maxCoeff() > 0.0)) {
    throw NumericalFailure("TauFamily: denominator " + std::to_string(den_) + " is not positive");
  }
  scaled_e_ = scaled_solve(Vector::Ones(k));
  if (!((scaled_e_.array() > 0.0).all())) throw NumericalFailure("TauFamily: nonpositive normalizer");
}

Vector TauFamily::scaled_solve(const Vector& q) const {
  const Index k = g_.rows();
  if (q.size() != k) throw ConfigError("TauFamily: vector length does not match K");
  Vector y(k);
  double c = q[z_];
  Vector a;
  if (lu_) {
    Vector qhat(k - 1);
    for (Index i = 0; i < k - 1; ++i) qhat[i] = q[rest_[static_cast<std::size_t>(i)]];
    a = lu_->solve(qhat);
    for (Index i = 0; i < k - 1; ++i) c += g_(z_, rest_[static_cast<std::size_t>(i)]) * a[i];
    for (Index i = 0; i < k - 1; ++i) y[rest_[static_cast<std::size_t>(i)]] = den_ * a[i] + u_[i] * c;
  }
  y[z_] = c;
  return y;
}

Vector TauFamily::apply(const Vector& q) const { return scaled_solve(q).cwiseQuotient(scaled_e_); }

Matrix TauFamily::matrix() const {
  const Index k = g_.rows();
  const Index k1 = k - 1;
  Matrix t(k, k);
  t(z_, z_) = 1.0;
  if (k1 > 0) {
    const Matrix m = lu_->solve(Matrix(Matrix::Identity(k1, k1)));
    RowVector gz(k1);
    for (Index b = 0; b < k1; ++b) gz[b] = g_(z_, rest_[static_cast<std::size_t>(b)]);
    const RowVector c = gz * m;
    for (Index a = 0; a < k1; ++a) {
      const Index x = rest_[static_cast<std::size_t>(a)];
      for (Index b = 0; b < k1; ++b) t(x, rest_[static_cast<std::size_t>(b)]) = den_ * m(a, b) + u_[a] * c[b];
      t(x, z_) = u_[a];
      t(z_, rest_[static_cast<std::size_t>(a)]) = c[a];
    }
  }
  for (Index x = 0; x < k; ++x) t.row(x) /= t.row(x).sum();
  return t;
}

ClassReport communicating_classes_diagnostic(const Matrix& g) {
  ClassReport r;
  r.classes = strongly_connected_components(g);
  for (Index c = 0; c < r.classes.count; ++c) {
    if (r.classes.closed[static_cast<std::size_t>(c)]) {
      ++r.closed_count;
    } else {
      ++r.transient_count;
    }
  }
  r.irreducible = r.classes.count == 1;
  if (r.closed_count > 1) {
    log_warning("G has " + std::to_string(r.closed_count) +
                " closed classes; the chain restricted to A may be reducible");
  }
  return r;
}

}  // namespace mctrunc
