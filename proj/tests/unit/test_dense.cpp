#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "mctrunc/dense.hpp"
#include "mctrunc/errors.hpp"
#include "support/oracles.hpp"

using namespace mctrunc;

TEST_CASE("stationary_small: two-state examples") {
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  Vector pi = stationary_small(flip);
  CHECK(pi[0] == doctest::Approx(0.5));
  CHECK(pi[1] == doctest::Approx(0.5));
  Matrix half = Matrix::Constant(2, 2, 0.5);
  pi = stationary_small(half);
  CHECK(pi[0] == doctest::Approx(0.5));
}

TEST_CASE("stationary_small: random chain matches squaring oracle") {
  std::mt19937_64 rng(1);
  Matrix p = oracle::random_stochastic(10, rng);
  Vector pi = stationary_small(p);
  Vector ref = oracle::stationary_by_squaring(p);
  CHECK((pi - ref).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("stationary_small: invariant under permutation") {
  std::mt19937_64 rng(2);
  Matrix p = oracle::random_stochastic(9, rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(9);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 9, rng);
  Matrix q = perm * p * perm.transpose();
  Vector a = stationary_small(p);
  Vector b = perm.transpose() * stationary_small(q);
  CHECK((a - b).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("stationary_small: reducible input is rejected") {
  Matrix p = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(stationary_small(p), AssumptionViolation);
}

TEST_CASE("perron_eigenpair: scalar") {
  Matrix g(1, 1);
  g << 0.9;
  auto pe = perron_eigenpair(g);
  CHECK(pe.lambda == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(pe.nu[0] * pe.h[0] == doctest::Approx(1.0));
}

TEST_CASE("perron_eigenpair: scaled doubly stochastic") {
  Matrix g(2, 2);
  g << 0.3, 0.7, 0.7, 0.3;
  g *= 0.8;
  auto pe = perron_eigenpair(g);
  CHECK(pe.lambda == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(pe.h[0] == doctest::Approx(pe.h[1]));
  CHECK(pe.nu.dot(pe.h) == doctest::Approx(1.0));
}

TEST_CASE("perron_eigenpair: random substochastic matches dense eigensolver") {
  std::mt19937_64 rng(4);
  Matrix g = oracle::random_substochastic(15, rng);
  auto pe = perron_eigenpair(g);
  Eigen::EigenSolver<Matrix> es(g);
  double best = 0.0;
  for (Index i = 0; i < 15; ++i) best = std::max(best, es.eigenvalues()[i].real());
  CHECK(std::abs(pe.lambda - best) < 1e-9);
  CHECK((g * pe.h - pe.lambda * pe.h).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((g.transpose() * pe.nu - pe.lambda * pe.nu).lpNorm<Eigen::Infinity>() < 1e-10);
  const Vector rows = g.rowwise().sum();
  CHECK(pe.lambda >= rows.minCoeff() - 1e-12);
  CHECK(pe.lambda <= rows.maxCoeff() + 1e-12);
}

TEST_CASE("perron_eigenpair: stochastic input") {
  std::mt19937_64 rng(8);
  Matrix g = oracle::random_stochastic(6, rng);
  auto pe = perron_eigenpair(g, Vector::Zero(6));
  CHECK(pe.lambda == 1.0);
  CHECK((pe.nu - oracle::stationary_by_squaring(g)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("fundamental_matrix") {
  Matrix one = Matrix::Identity(1, 1);
  CHECK(fundamental_matrix(one, Vector::Ones(1))(0, 0) == doctest::Approx(1.0));

  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  Vector pi = Vector::Constant(2, 0.5);
  Matrix f = fundamental_matrix(flip, pi);
  Matrix a = Matrix::Identity(2, 2) - flip + Vector::Ones(2) * pi.transpose();
  CHECK((f * a - Matrix::Identity(2, 2)).norm() < 1e-12);

  std::mt19937_64 rng(9);
  Matrix p = oracle::random_stochastic(8, rng);
  Vector s = oracle::stationary_dense(p);
  Matrix ref = (Matrix::Identity(8, 8) - p + Vector::Ones(8) * s.transpose()).inverse();
  CHECK((fundamental_matrix(p, s) - ref).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("strongly_connected_components") {
  CHECK(strongly_connected_components(Matrix(Matrix::Identity(3, 3))).count == 3);
  Matrix cycle = Matrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) cycle(i, (i + 1) % 4) = 1.0;
  CHECK(strongly_connected_components(cycle).count == 1);
  Matrix two = Matrix::Zero(4, 4);
  two(0, 1) = two(1, 0) = two(2, 3) = two(3, 2) = 1.0;
  auto c = strongly_connected_components(two);
  CHECK(c.count == 2);
  CHECK(c.closed[0]);
  CHECK(c.closed[1]);
  two(1, 2) = 1.0;  // first block now drains into the second
  c = strongly_connected_components(two);
  CHECK(c.count == 2);
  CHECK_FALSE(c.closed[static_cast<std::size_t>(c.label[0])]);
  CHECK(c.closed[static_cast<std::size_t>(c.label[3])]);
}
