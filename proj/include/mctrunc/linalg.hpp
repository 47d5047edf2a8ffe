#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mctrunc {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// LU factorization of I - M for a nonnegative M with row sums at most one
/// (a weakly row diagonally dominant M-matrix).
///
/// The matrix is supplied in triplet form: the entries of M and, separately,
/// the row deficits s(i) = 1 - sum_j M(i, j) >= 0. Pivots are formed from the
/// deficits and the off-diagonal magnitudes, so elimination and both triangular
/// solves only ever add quantities of one sign. Solutions with nonnegative
/// right-hand sides are then accurate entrywise, including entries many orders
/// of magnitude below the largest one (exit probabilities near 1e-30, say).
///
/// Storage is a variable-band envelope; a reverse Cuthill-McKee ordering is used
/// when it shrinks the symbolic factorization cost. Matrices smaller than
/// `dense_threshold` are factored in their natural order (effectively dense).
class MMatrixLU {
 public:
  struct Options {
    bool allow_reordering = true;
    Index dense_threshold = 64;
    /// Normwise backward-error tolerance of the mandatory residual check.
    double residual_tolerance = 1e-9;
  };

  MMatrixLU(const SparseMatrix& m, const Vector& deficit);
  MMatrixLU(const SparseMatrix& m, const Vector& deficit, Options options);
  MMatrixLU(const Matrix& m, const Vector& deficit);

  Index size() const { return n_; }

  /// Solves (I - M) x = b.
  Vector solve(const Vector& b) const;
  /// Solves x (I - M) = b for a row vector x, returned as a column vector.
  Vector solve_transpose(const Vector& b) const;
  /// Column-by-column solve of (I - M) X = B.
  Matrix solve(const Matrix& b) const;

  /// Fill statistics (stored L plus U off-diagonal entries).
  std::size_t stored_entries() const { return l_val_.size() + u_val_.size(); }
  bool reordered() const { return reordered_; }

 private:
  void factor();
  void check_residual(const Vector& x, const Vector& b, bool transpose) const;

  Index n_ = 0;
  Options options_;
  SparseMatrix m_;            // original M, kept for residual checks
  std::vector<Index> perm_;   // perm_[new] = old
  std::vector<Index> iperm_;  // iperm_[old] = new
  bool reordered_ = false;

  SparseMatrix a_;     // permuted M
  Vector deficit_;     // permuted deficits

  // Envelope storage in permuted order. Row i of L covers columns
  // [l_first_[i], i); row i of U covers columns (i, u_last_[i]].
  std::vector<Index> l_first_, l_start_;
  std::vector<Index> u_last_, u_start_;
  std::vector<double> l_val_, u_val_;
  std::vector<double> pivot_;
};

/// Solves (I - M) X = rhs for a nonnegative M with spectral radius below one.
/// Deficits are taken as max(0, 1 - row sum); use MMatrixLU directly when they
/// are known more accurately.
Matrix solve_linear(const SparseMatrix& m, const Matrix& rhs);
Matrix solve_linear(const Matrix& m, const Matrix& rhs);

/// Row sums of a dense matrix, with the complementary deficit 1 - sum clamped at zero.
Vector row_deficits(const Matrix& m);

/// Reverse Cuthill-McKee ordering of the symmetrized pattern; result[new] = old.
std::vector<Index> reverse_cuthill_mckee(const SparseMatrix& m);

}  // namespace mctrunc
