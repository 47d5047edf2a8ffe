#include "mctrunc/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mctrunc/errors.hpp"

namespace mctrunc {

Vector stationary_small(const Matrix& p) {
  const Index n = p.rows();
  if (n == 0 || p.cols() != n) throw ConfigError("stationary_small: matrix must be square and nonempty");
  if (strongly_connected_components(p).count != 1) {
    throw AssumptionViolation("stationary_small: matrix is reducible");
  }
  Matrix a = Matrix::Identity(n, n) - p.transpose();
  a.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b[n - 1] = 1.0;
  Vector pi = a.partialPivLu().solve(b);
  for (Index i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0)) throw AssumptionViolation("stationary_small: nonpositive stationary component; reducible input");
  }
  pi /= pi.sum();
  const double residual = (p.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  if (!(residual <= 1e-10)) {
    throw NumericalFailure("stationary_small: residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  return pi;
}

namespace {

// Power iteration on (I - G)^{-1} or its transpose; returns the L1-normalized
// iterate and the growth factor mu = 1 / (1 - lambda).
std::pair<Vector, double> inverse_iteration(const MMatrixLU& lu, bool transpose, Index n) {
  constexpr int kMaxIter = 1000000;
  constexpr double kTol = 1e-14;
  Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double mu = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector y = transpose ? lu.solve_transpose(v) : lu.solve(v);
    mu = y.sum();
    y /= mu;
    const double change = (y - v).lpNorm<1>();
    v = std::move(y);
    if (change <= kTol) return {v, mu};
  }
  throw NumericalFailure("perron_eigenpair: inverse iteration did not converge");
}

}  // namespace

PerronEigenpair perron_eigenpair(const Matrix& g, const Vector& deficit) {
  const Index n = g.rows();
  if (n == 0 || g.cols() != n) throw ConfigError("perron_eigenpair: matrix must be square and nonempty");
  if ((g.array() < 0.0).any() || !g.allFinite()) throw ConfigError("perron_eigenpair: matrix must be nonnegative and finite");
  if (strongly_connected_components(g).count != 1) {
    throw AssumptionViolation("perron_eigenpair: matrix is reducible");
  }

  // Bring the matrix to row sums at most one so that I - M is an M-matrix.
  double scale = 1.0;
  Matrix m = g;
  Vector d = deficit.size() == n ? deficit : row_deficits(g);
  const double max_row = g.rowwise().sum().maxCoeff();
  const bool stochastic = d.maxCoeff() == 0.0;
  if (!stochastic && max_row > 1.0) {
    scale = max_row;
    m /= scale;
    d = row_deficits(m);
  }

  PerronEigenpair out;
  if (stochastic) {
    out.lambda = scale;
    out.h = Vector::Ones(n);
    out.nu = stationary_small(m);
  } else {
    MMatrixLU lu(m, d);
    auto [h, mu_h] = inverse_iteration(lu, false, n);
    auto [nu, mu_nu] = inverse_iteration(lu, true, n);
    (void)mu_nu;
    out.lambda = scale * (1.0 - 1.0 / mu_h);
    out.h = h / h.maxCoeff();
    out.nu = nu;
  }
  out.nu /= out.nu.dot(out.h);

  const double tol = 1e-10;
  const double rh = (g * out.h - out.lambda * out.h).lpNorm<Eigen::Infinity>();
  const double rnu = (g.transpose() * out.nu - out.lambda * out.nu).lpNorm<Eigen::Infinity>();
  if (!(rh <= tol * std::max(1.0, out.lambda) * out.h.lpNorm<Eigen::Infinity>()) ||
      !(rnu <= tol * std::max(1.0, out.lambda) * out.nu.lpNorm<Eigen::Infinity>())) {
    throw NumericalFailure("perron_eigenpair: eigen-residual check failed");
  }
  if ((out.h.array() <= 0.0).any() || (out.nu.array() <= 0.0).any()) {
    throw NumericalFailure("perron_eigenpair: eigenvector has nonpositive entries");
  }
  return out;
}

Matrix fundamental_matrix(const Matrix& p, const Vector& pi) {
  const Index n = p.rows();
  if (p.cols() != n || pi.size() != n) throw ConfigError("fundamental_matrix: dimension mismatch");
  Matrix a = Matrix::Identity(n, n) - p + Vector::Ones(n) * pi.transpose();
  Eigen::PartialPivLU<Matrix> lu(a);
  Matrix f = lu.inverse();
  const double residual = (f * a - Matrix::Identity(n, n)).lpNorm<Eigen::Infinity>();
  if (!f.allFinite() || !(residual <= 1e-9)) {
    throw NumericalFailure("fundamental_matrix: residual " + std::to_string(residual) + " exceeds 1e-9");
  }
  return f;
}

ComponentLabels strongly_connected_components(const SparseMatrix& m) {
  const Index n = m.rows();
  ComponentLabels out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack;
  Index counter = 0;

  struct Frame {
    Index v;
    SparseMatrix::InnerIterator it;
  };
  std::vector<Frame> call;
  for (Index root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    auto visit = [&](Index v) {
      index[static_cast<std::size_t>(v)] = low[static_cast<std::size_t>(v)] = counter++;
      stack.push_back(v);
      on_stack[static_cast<std::size_t>(v)] = 1;
      call.push_back(Frame{v, SparseMatrix::InnerIterator(m, v)});
    };
    visit(root);
    while (!call.empty()) {
      Frame& f = call.back();
      const auto v = static_cast<std::size_t>(f.v);
      if (f.it) {
        const Index w = f.it.col();
        const bool edge = f.it.value() != 0.0;
        ++f.it;
        if (!edge) continue;
        const auto wi = static_cast<std::size_t>(w);
        if (index[wi] < 0) {
          visit(w);
        } else if (on_stack[wi]) {
          low[v] = std::min(low[v], index[wi]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        Index size = 0;
        for (;;) {
          const Index w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          out.label[static_cast<std::size_t>(w)] = out.count;
          ++size;
          if (w == f.v) break;
        }
        out.size.push_back(size);
        ++out.count;
      }
      const Index child_low = low[v];
      call.pop_back();
      if (!call.empty()) {
        auto& parent = low[static_cast<std::size_t>(call.back().v)];
        parent = std::min(parent, child_low);
      }
    }
  }

  out.closed.assign(static_cast<std::size_t>(out.count), true);
  for (Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      if (it.value() != 0.0 && out.label[static_cast<std::size_t>(i)] != out.label[static_cast<std::size_t>(it.col())]) {
        out.closed[static_cast<std::size_t>(out.label[static_cast<std::size_t>(i)])] = false;
      }
    }
  }
  return out;
}

ComponentLabels strongly_connected_components(const Matrix& m) {
  return strongly_connected_components(SparseMatrix(m.sparseView(0.0, 0.0)));
}

}  // namespace mctrunc
