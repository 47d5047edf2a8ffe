#pragma once

#include <vector>

#include "mctrunc/linalg.hpp"

namespace mctrunc {

/// Stationary probability (as a column vector) of an irreducible stochastic
/// matrix, by replacing the last balance equation with sum(pi) = 1.
Vector stationary_small(const Matrix& p);

struct PerronEigenpair {
  double lambda = 0.0;
  Vector nu;  // left eigenvector, stored as a column
  Vector h;   // right eigenvector
};

/// Perron root and eigenvectors of an irreducible nonnegative matrix,
/// normalized so that sum_x nu(x) h(x) = 1 and max h = 1 before that scaling.
/// `deficit` holds 1 - row sums when they are known more accurately than
/// the matrix entries imply; pass an empty vector to derive them.
PerronEigenpair perron_eigenpair(const Matrix& g, const Vector& deficit = Vector());

/// F = (I - P + Pi)^{-1}, Pi the matrix with every row equal to pi.
Matrix fundamental_matrix(const Matrix& p, const Vector& pi);

struct ComponentLabels {
  std::vector<Index> label;   // component of each vertex, numbered in reverse topological order
  Index count = 0;
  std::vector<bool> closed;   // no edge leaves the component
  std::vector<Index> size;
};

/// Strongly connected components of the pattern of nonzero entries.
ComponentLabels strongly_connected_components(const SparseMatrix& m);
ComponentLabels strongly_connected_components(const Matrix& m);

}  // namespace mctrunc
