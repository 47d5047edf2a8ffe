#include "mctrunc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "mctrunc/errors.hpp"

namespace mctrunc {

namespace {

struct Envelope {
  std::vector<Index> l_first;
  std::vector<Index> u_last;
  double cost = 0.0;
};

// Symbolic factorization of the pattern of `a` in its current order.
Envelope symbolic(const SparseMatrix& a) {
  const Index n = a.rows();
  Envelope env;
  env.l_first.resize(static_cast<std::size_t>(n));
  env.u_last.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Index first = i;
    Index last = i;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      if (it.value() == 0.0) continue;
      first = std::min<Index>(first, it.col());
      last = std::max<Index>(last, it.col());
    }
    env.l_first[i] = first;
    for (Index k = first; k < i; ++k) {
      last = std::max(last, env.u_last[k]);
      env.cost += static_cast<double>(env.u_last[k] - k + 1);
    }
    env.u_last[i] = last;
  }
  return env;
}

SparseMatrix permute(const SparseMatrix& m, const std::vector<Index>& perm,
                     const std::vector<Index>& iperm) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      trip.emplace_back(iperm[static_cast<std::size_t>(it.row())],
                        iperm[static_cast<std::size_t>(it.col())], it.value());
    }
  }
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  (void)perm;
  return out;
}

}  // namespace

MMatrixLU::MMatrixLU(const SparseMatrix& m, const Vector& deficit)
    : MMatrixLU(m, deficit, Options{}) {}

MMatrixLU::MMatrixLU(const Matrix& m, const Vector& deficit)
    : MMatrixLU(SparseMatrix(m.sparseView(0.0, 0.0)), deficit, Options{}) {}

MMatrixLU::MMatrixLU(const SparseMatrix& m, const Vector& deficit, Options options)
    : n_(m.rows()), options_(options), m_(m) {
  if (m.rows() != m.cols()) throw ConfigError("MMatrixLU: matrix is not square");
  if (deficit.size() != n_) throw ConfigError("MMatrixLU: deficit vector has wrong length");
  m_.makeCompressed();
  for (Index i = 0; i < n_; ++i) {
    if (!(deficit[i] >= 0.0) || !std::isfinite(deficit[i])) {
      throw ConfigError("MMatrixLU: row deficit " + std::to_string(i) + " is negative or not finite");
    }
    for (SparseMatrix::InnerIterator it(m_, i); it; ++it) {
      if (!(it.value() >= 0.0) || !std::isfinite(it.value())) {
        throw ConfigError("MMatrixLU: matrix entry (" + std::to_string(i) + "," +
                          std::to_string(it.col()) + ") is negative or not finite");
      }
    }
  }

  perm_.resize(static_cast<std::size_t>(n_));
  std::iota(perm_.begin(), perm_.end(), Index{0});
  Envelope natural = symbolic(m_);
  Envelope chosen = natural;
  a_ = m_;
  if (options_.allow_reordering && n_ >= options_.dense_threshold) {
    std::vector<Index> rcm = reverse_cuthill_mckee(m_);
    std::vector<Index> ircm(rcm.size());
    for (std::size_t k = 0; k < rcm.size(); ++k) ircm[static_cast<std::size_t>(rcm[k])] = static_cast<Index>(k);
    SparseMatrix permuted = permute(m_, rcm, ircm);
    Envelope env = symbolic(permuted);
    if (env.cost < natural.cost) {
      perm_ = std::move(rcm);
      a_ = std::move(permuted);
      chosen = std::move(env);
      reordered_ = true;
    }
  }
  iperm_.resize(perm_.size());
  for (std::size_t k = 0; k < perm_.size(); ++k) iperm_[static_cast<std::size_t>(perm_[k])] = static_cast<Index>(k);
  deficit_.resize(n_);
  for (Index k = 0; k < n_; ++k) deficit_[k] = deficit[perm_[static_cast<std::size_t>(k)]];

  l_first_ = std::move(chosen.l_first);
  u_last_ = std::move(chosen.u_last);
  factor();
}

void MMatrixLU::factor() {
  const auto n = static_cast<std::size_t>(n_);
  l_start_.assign(n + 1, 0);
  u_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    l_start_[i + 1] = l_start_[i] + (static_cast<Index>(i) - l_first_[i]);
    u_start_[i + 1] = u_start_[i] + (u_last_[i] - static_cast<Index>(i));
  }
  l_val_.assign(static_cast<std::size_t>(l_start_[n]), 0.0);
  u_val_.assign(static_cast<std::size_t>(u_start_[n]), 0.0);
  pivot_.assign(n, 0.0);
  std::vector<double> reduced_sum(n, 0.0);
  std::vector<double> w(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Index ii = static_cast<Index>(i);
    for (SparseMatrix::InnerIterator it(a_, ii); it; ++it) {
      if (it.col() != ii) w[static_cast<std::size_t>(it.col())] = -it.value();
    }
    double s = deficit_[ii];
    double* lrow = l_val_.data() + l_start_[i];
    for (Index k = l_first_[i]; k < ii; ++k) {
      const double wk = w[static_cast<std::size_t>(k)];
      w[static_cast<std::size_t>(k)] = 0.0;
      if (wk == 0.0) continue;
      const double l = wk / pivot_[static_cast<std::size_t>(k)];
      lrow[k - l_first_[i]] = l;
      const double* urow = u_val_.data() + u_start_[static_cast<std::size_t>(k)];
      const Index ulen = u_last_[static_cast<std::size_t>(k)] - k;
      double* wk1 = w.data() + k + 1;
      for (Index m = 0; m < ulen; ++m) wk1[m] -= l * urow[m];
      // reduced row sums only grow: l <= 0 and the sums are nonnegative
      s -= l * reduced_sum[static_cast<std::size_t>(k)];
    }
    w[i] = 0.0;  // the diagonal is carried by the reduced row sum
    double off = 0.0;
    double* urow = u_val_.data() + u_start_[i];
    const Index ulen = u_last_[i] - ii;
    for (Index m = 0; m < ulen; ++m) {
      const double v = w[i + 1 + static_cast<std::size_t>(m)];
      urow[m] = v;
      off -= v;
      w[i + 1 + static_cast<std::size_t>(m)] = 0.0;
    }
    reduced_sum[i] = s;
    const double piv = s + off;
    if (!(piv > 0.0) || !std::isfinite(piv)) {
      throw NumericalFailure("MMatrixLU: singular to working precision at pivot " +
                             std::to_string(perm_[i]) + " (pivot " + std::to_string(piv) + ")");
    }
    pivot_[i] = piv;
  }
}

Vector MMatrixLU::solve(const Vector& b) const {
  if (b.size() != n_) throw ConfigError("MMatrixLU::solve: right-hand side has wrong length");
  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const double* lrow = l_val_.data() + l_start_[i];
    const Index first = l_first_[i];
    double acc = y[i];
    for (Index k = first; k < static_cast<Index>(i); ++k) acc -= lrow[k - first] * y[static_cast<std::size_t>(k)];
    y[i] = acc;
  }
  for (std::size_t i = n; i-- > 0;) {
    const double* urow = u_val_.data() + u_start_[i];
    const Index ulen = u_last_[i] - static_cast<Index>(i);
    double acc = y[i];
    for (Index m = 0; m < ulen; ++m) acc -= urow[m] * y[i + 1 + static_cast<std::size_t>(m)];
    y[i] = acc / pivot_[i];
  }
  Vector x(n_);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
  check_residual(x, b, false);
  return x;
}

Vector MMatrixLU::solve_transpose(const Vector& b) const {
  if (b.size() != n_) throw ConfigError("MMatrixLU::solve_transpose: right-hand side has wrong length");
  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = b[perm_[i]];
  // U^T z = b, right-looking
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = z[i] / pivot_[i];
    z[i] = zi;
    if (zi == 0.0) continue;
    const double* urow = u_val_.data() + u_start_[i];
    const Index ulen = u_last_[i] - static_cast<Index>(i);
    for (Index m = 0; m < ulen; ++m) z[i + 1 + static_cast<std::size_t>(m)] -= urow[m] * zi;
  }
  // L^T x = z, unit diagonal
  for (std::size_t i = n; i-- > 0;) {
    const double xi = z[i];
    if (xi == 0.0) continue;
    const double* lrow = l_val_.data() + l_start_[i];
    const Index first = l_first_[i];
    for (Index k = first; k < static_cast<Index>(i); ++k) z[static_cast<std::size_t>(k)] -= lrow[k - first] * xi;
  }
  Vector x(n_);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = z[i];
  check_residual(x, b, true);
  return x;
}

Matrix MMatrixLU::solve(const Matrix& b) const {
  Matrix x(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vector(b.col(j)));
  return x;
}

void MMatrixLU::check_residual(const Vector& x, const Vector& b, bool transpose) const {
  Vector mx = Vector::Zero(n_);
  Vector absmx = Vector::Zero(n_);
  for (Index i = 0; i < n_; ++i) {
    for (SparseMatrix::InnerIterator it(m_, i); it; ++it) {
      if (transpose) {
        mx[it.col()] += it.value() * x[i];
        absmx[it.col()] += it.value() * std::abs(x[i]);
      } else {
        mx[i] += it.value() * x[it.col()];
        absmx[i] += it.value() * std::abs(x[it.col()]);
      }
    }
  }
  const double residual = (b - (x - mx)).lpNorm<Eigen::Infinity>();
  const double scale = b.lpNorm<Eigen::Infinity>() + (x.cwiseAbs() + absmx).lpNorm<Eigen::Infinity>();
  if (!std::isfinite(residual) || residual > options_.residual_tolerance * scale) {
    throw NumericalFailure("MMatrixLU: residual check failed (residual " + std::to_string(residual) +
                           ", scale " + std::to_string(scale) + ")");
  }
}

Vector row_deficits(const Matrix& m) {
  Vector d(m.rows());
  for (Index i = 0; i < m.rows(); ++i) d[i] = std::max(0.0, 1.0 - m.row(i).sum());
  return d;
}

Matrix solve_linear(const SparseMatrix& m, const Matrix& rhs) {
  Vector d(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) s += it.value();
    d[i] = std::max(0.0, 1.0 - s);
  }
  return MMatrixLU(m, d).solve(rhs);
}

Matrix solve_linear(const Matrix& m, const Matrix& rhs) {
  return MMatrixLU(m, row_deficits(m)).solve(rhs);
}

std::vector<Index> reverse_cuthill_mckee(const SparseMatrix& m) {
  const auto n = static_cast<std::size_t>(m.rows());
  std::vector<std::vector<Index>> adj(n);
  for (Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      if (it.col() == i || it.value() == 0.0) continue;
      adj[static_cast<std::size_t>(i)].push_back(it.col());
      adj[static_cast<std::size_t>(it.col())].push_back(i);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  auto degree = [&](Index v) { return adj[static_cast<std::size_t>(v)].size(); };

  std::vector<Index> order;
  order.reserve(n);
  std::vector<char> placed(n, 0);
  std::vector<Index> level(n, -1);

  // Farthest node (ties: smallest degree) from `start` within its component.
  auto farthest = [&](Index start) {
    std::fill(level.begin(), level.end(), -1);
    std::deque<Index> q{start};
    level[static_cast<std::size_t>(start)] = 0;
    Index best = start;
    while (!q.empty()) {
      const Index v = q.front();
      q.pop_front();
      const auto lv = level[static_cast<std::size_t>(v)];
      const auto lb = level[static_cast<std::size_t>(best)];
      if (lv > lb || (lv == lb && degree(v) < degree(best))) best = v;
      for (Index w : adj[static_cast<std::size_t>(v)]) {
        if (level[static_cast<std::size_t>(w)] < 0) {
          level[static_cast<std::size_t>(w)] = lv + 1;
          q.push_back(w);
        }
      }
    }
    return best;
  };

  for (std::size_t s = 0; s < n; ++s) {
    if (placed[s]) continue;
    Index start = static_cast<Index>(s);
    for (int sweep = 0; sweep < 2; ++sweep) start = farthest(start);
    std::deque<Index> q{start};
    placed[static_cast<std::size_t>(start)] = 1;
    std::vector<Index> nbrs;
    while (!q.empty()) {
      const Index v = q.front();
      q.pop_front();
      order.push_back(v);
      nbrs.clear();
      for (Index w : adj[static_cast<std::size_t>(v)]) {
        if (!placed[static_cast<std::size_t>(w)]) {
          placed[static_cast<std::size_t>(w)] = 1;
          nbrs.push_back(w);
        }
      }
      std::stable_sort(nbrs.begin(), nbrs.end(), [&](Index a, Index b) { return degree(a) < degree(b); });
      for (Index w : nbrs) q.push_back(w);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace mctrunc
