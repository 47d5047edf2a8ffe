#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "mctrunc/censor.hpp"
#include "mctrunc/errors.hpp"
#include "support/host.hpp"
#include "support/oracles.hpp"

using namespace mctrunc;

namespace {

Vector restrict_normalized(const Vector& pi, int k) {
  Vector out = pi.head(k);
  return out / out.sum();
}

}  // namespace

TEST_CASE("compute_G: A = S matches the dense Schur complement") {
  std::mt19937_64 rng(12);
  host::MatrixChain m(oracle::random_stochastic(12, rng));
  auto t = host::truncate(m, 3, 12);
  Censoring c(t);
  Matrix ref = oracle::schur_censored(m.matrix(), 3);
  CHECK((c.G() - ref).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(c.deficit().maxCoeff() == 0.0);
  // The stationary vector of G is the exact censored distribution.
  Vector pi = oracle::stationary_dense(m.matrix());
  CHECK((stationary_small(c.G()) - restrict_normalized(pi, 3)).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("compute_G: no A' to A' transitions") {
  // States 0,1 in K; 2,3 in A' and never move between each other.
  Matrix p(4, 4);
  p << 0.1, 0.2, 0.3, 0.4,
       0.5, 0.0, 0.25, 0.25,
       0.6, 0.4, 0.0, 0.0,
       0.3, 0.7, 0.0, 0.0;
  host::MatrixChain m(p);
  auto t = host::truncate(m, 2, 4);
  Censoring c(t);
  Matrix ref = p.topLeftCorner(2, 2) + p.topRightCorner(2, 2) * p.bottomLeftCorner(2, 2);
  CHECK((c.G() - ref).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("compute_G: K = A gives P11") {
  std::mt19937_64 rng(13);
  host::MatrixChain m(oracle::random_backbone_stochastic(8, rng));
  auto t = host::truncate(m, 5, 5);
  Censoring c(t);
  CHECK((c.G() - m.matrix().topLeftCorner(5, 5)).lpNorm<Eigen::Infinity>() == 0.0);
  for (Index i = 0; i < 5; ++i) CHECK(c.deficit()[i] == doctest::Approx(1.0 - c.n()[i]).epsilon(1e-12));
}

TEST_CASE("compute_G: reducible G is rejected") {
  Matrix p(4, 4);
  p << 0.5, 0.0, 0.5, 0.0,
       0.0, 0.0, 0.0, 1.0,
       0.0, 1.0, 0.0, 0.0,
       1.0, 0.0, 0.0, 0.0;
  host::MatrixChain m(p);
  // K = {0,1}, A = {0,1,2}: state 1 can only return to K through state 3.
  auto t = host::truncate(m, 2, 3);
  CHECK_THROWS_AS(Censoring{t}, AssumptionViolation);
  Censoring::Options opt;
  opt.require_irreducible = false;
  Censoring c(t, opt);
  auto report = communicating_classes_diagnostic(c.G());
  CHECK(report.classes.count == 2);
  CHECK_FALSE(report.irreducible);
}

TEST_CASE("compute_G: threaded assembly is identical") {
  std::mt19937_64 rng(14);
  host::MatrixChain m(oracle::random_backbone_stochastic(30, rng));
  auto t = host::truncate(m, 6, 25);
  Censoring::Options opt;
  opt.threads = 4;
  Censoring c1(t), c4(t, opt);
  CHECK(c1.G() == c4.G());
}

TEST_CASE("G is entrywise below the censored matrix and grows with A") {
  std::mt19937_64 rng(15);
  host::MatrixChain m(oracle::random_backbone_stochastic(20, rng));
  Matrix pk = oracle::schur_censored(m.matrix(), 4);
  Matrix prev = Matrix::Zero(4, 4);
  for (int a = 4; a <= 20; a += 4) {
    auto t = host::truncate(m, 4, a);
    Censoring c(t);
    CHECK((c.G().array() <= pk.array() + 1e-15).all());
    CHECK((c.G().array() >= prev.array() - 1e-15).all());
    prev = c.G();
  }
}

TEST_CASE("kappa_lower") {
  SUBCASE("A' empty") {
    Matrix p = Matrix::Constant(2, 2, 0.5);
    host::MatrixChain m(p);
    auto t = host::truncate(m, 2, 2);
    Censoring c(t);
    CHECK(c.kappa_lower(Vector::Ones(2)) == Vector::Ones(2));
  }
  SUBCASE("deterministic flip") {
    Matrix p(2, 2);
    p << 0, 1, 1, 0;
    host::MatrixChain m(p);
    auto t = host::truncate(m, 1, 2);
    Censoring c(t);
    CHECK(c.kappa_lower(Vector::Ones(2))[0] == doctest::Approx(2.0));
  }
  SUBCASE("absorbing chain oracle") {
    std::mt19937_64 rng(16);
    host::MatrixChain m(oracle::random_stochastic(12, rng));
    auto t = host::truncate(m, 3, 12);
    Censoring c(t);
    Vector w = Vector::LinSpaced(12, 0.0, 11.0);
    Vector ref = oracle::kappa_exact(m.matrix(), 3, w);
    CHECK((c.kappa_lower(w) - ref).lpNorm<Eigen::Infinity>() < 1e-10 * ref.maxCoeff());
    CHECK((c.kappa_lower("r", w) - ref).lpNorm<Eigen::Infinity>() < 1e-10 * ref.maxCoeff());
  }
  SUBCASE("monotone in A") {
    std::mt19937_64 rng(17);
    host::MatrixChain m(oracle::random_backbone_stochastic(16, rng));
    Vector prev = Vector::Zero(2);
    for (int a = 2; a <= 16; a += 2) {
      auto t = host::truncate(m, 2, a);
      Censoring c(t);
      Vector w = Vector::Ones(a);
      Vector k = c.kappa_lower(w);
      CHECK((k.array() >= prev.array() - 1e-12).all());
      CHECK((k.array() >= 1.0).all());
      prev = k;
    }
  }
}

TEST_CASE("stochasticize_row") {
  Matrix g(2, 2);
  g << 0.4, 0.4, 0.2, 0.6;
  auto s = stochasticize_row(g);
  Matrix ref(2, 2);
  ref << 0.5, 0.5, 0.25, 0.75;
  CHECK((s.p - ref).norm() < 1e-15);

  Matrix st = Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK((stochasticize_row(st).p - st).norm() < 1e-15);

  std::mt19937_64 rng(18);
  host::MatrixChain m(oracle::random_stochastic(12, rng));
  auto t = host::truncate(m, 4, 12);
  Censoring c(t);
  auto s2 = stochasticize_row(c);
  Vector pi = oracle::stationary_dense(m.matrix());
  CHECK((s2.pi - restrict_normalized(pi, 4)).lpNorm<Eigen::Infinity>() < 1e-10);
  // P2 lies above G.
  CHECK((s2.p.array() >= c.G().array() - 1e-15).all());

  Matrix zero_row(2, 2);
  zero_row << 0.5, 0.5, 0.0, 0.0;
  CHECK_THROWS_AS(stochasticize_row(zero_row), AssumptionViolation);
}

TEST_CASE("stochasticize_pf") {
  Matrix p(2, 2);
  p << 0.2, 0.8, 0.6, 0.4;
  auto s = stochasticize_pf(Matrix(0.7 * p));
  CHECK((s.p - p).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((s.pi - oracle::stationary_dense(p)).lpNorm<Eigen::Infinity>() < 1e-12);

  Matrix one(1, 1);
  one << 0.9;
  auto s1 = stochasticize_pf(one);
  CHECK(s1.p(0, 0) == doctest::Approx(1.0));
  CHECK(s1.pi[0] == doctest::Approx(1.0));

  std::mt19937_64 rng(19);
  Matrix g = oracle::random_substochastic(10, rng);
  auto s10 = stochasticize_pf(g);
  CHECK((s10.p.transpose() * s10.pi - s10.pi).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK((s10.p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
  Eigen::EigenSolver<Matrix> es(g);
  double best = 0.0;
  for (Index i = 0; i < 10; ++i) best = std::max(best, es.eigenvalues()[i].real());
  CHECK(s10.perron->lambda == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("approx_expectation and approx_distribution on a finite host") {
  std::mt19937_64 rng(20);
  host::MatrixChain m(oracle::random_stochastic(12, rng));
  auto t = host::truncate(m, 3, 12);
  Censoring c(t);
  Vector r = Vector::LinSpaced(12, 1.0, 12.0);
  Vector e = Vector::Ones(12);
  Vector pi = oracle::stationary_dense(m.matrix());
  for (auto method : {StochasticizationMethod::row, StochasticizationMethod::perron}) {
    auto s = stochasticize(c, method);
    const Vector ke = c.kappa_lower(e);
    CHECK(approx_expectation(s.pi, ke, ke) == doctest::Approx(1.0));
    CHECK(approx_expectation(s.pi, c.kappa_lower(Vector(3.5 * e)), ke) == doctest::Approx(3.5));
    CHECK(approx_expectation(s.pi, c.kappa_lower(r), ke) == doctest::Approx(pi.dot(r)).epsilon(1e-10));
    CHECK((approx_distribution(c, s.pi) - pi).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  host::MatrixChain f(flip);
  auto tf = host::truncate(f, 1, 2);
  Censoring cf(tf);
  Vector d = approx_distribution(cf, stochasticize_row(cf).pi);
  CHECK(d[0] == doctest::Approx(0.5));
  CHECK(d[1] == doctest::Approx(0.5));

  Matrix single(1, 1);
  single << 1.0;
  host::MatrixChain s1(single);
  auto t1 = host::truncate(s1, 1, 1);
  Censoring c1(t1);
  CHECK(approx_distribution(c1, stochasticize_row(c1).pi)[0] == 1.0);
}

TEST_CASE("exit_approximation") {
  SUBCASE("single state") {
    Matrix p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    host::MatrixChain m(p);
    auto t = host::truncate(m, 1, 1);
    CHECK(exit_approximation(t, 0)[0] == 1.0);
  }
  SUBCASE("two retained states of a three-state host") {
    Matrix p(3, 3);
    p << 0.2, 0.5, 0.3,
         0.4, 0.4, 0.2,
         0.3, 0.3, 0.4;
    host::MatrixChain m(p);
    auto t = host::truncate(m, 1, 2);
    Vector nu = exit_approximation(t, 0);
    // Dense oracle: occupation measure before exit from {0,1} started at 0.
    Matrix h = p.topLeftCorner(2, 2);
    Vector occ = (Matrix::Identity(2, 2) - h).transpose().fullPivLu().solve(Vector::Unit(2, 0));
    CHECK((nu - occ / occ.sum()).lpNorm<Eigen::Infinity>() < 1e-15);
    // With K = {z} it coincides with the censoring approximation.
    Censoring c(t);
    Vector pi2 = approx_distribution(c, stochasticize_row(c).pi);
    CHECK((nu - pi2).lpNorm<Eigen::Infinity>() < 1e-15);
  }
}

TEST_CASE("conditioned_chain") {
  SUBCASE("A = S") {
    std::mt19937_64 rng(21);
    host::MatrixChain m(oracle::random_stochastic(10, rng));
    auto t = host::truncate(m, 3, 10);
    Censoring c(t);
    auto cc = conditioned_chain(c);
    CHECK((cc.u.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((Matrix(cc.r) - m.matrix()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((cc.pi3 - oracle::stationary_dense(m.matrix())).lpNorm<Eigen::Infinity>() < 1e-10);
  }
  SUBCASE("K = A on a five-state host") {
    Matrix p(5, 5);
    p << 0.1, 0.2, 0.3, 0.2, 0.2,
         0.3, 0.1, 0.1, 0.4, 0.1,
         0.2, 0.2, 0.2, 0.2, 0.2,
         0.1, 0.1, 0.1, 0.1, 0.6,
         0.5, 0.1, 0.1, 0.1, 0.2;
    host::MatrixChain m(p);
    auto t = host::truncate(m, 3, 3);
    Censoring c(t);
    auto cc = conditioned_chain(c);
    // u is the mass into K; R row-normalizes the K block.
    for (Index x = 0; x < 3; ++x) CHECK(cc.u[x] == doctest::Approx(p.row(x).head(3).sum()));
    Matrix ref = p.topLeftCorner(3, 3);
    for (Index x = 0; x < 3; ++x) ref.row(x) /= ref.row(x).sum();
    CHECK((Matrix(cc.r) - ref).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((cc.pi3 - oracle::stationary_dense(ref)).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("proper truncation is stationary for R") {
    std::mt19937_64 rng(22);
    host::MatrixChain m(oracle::random_backbone_stochastic(20, rng));
    auto t = host::truncate(m, 4, 14);
    Censoring c(t);
    auto cc = conditioned_chain(c);
    CHECK((Vector(cc.r.transpose() * cc.pi3) - cc.pi3).lpNorm<Eigen::Infinity>() < 1e-12);
    Vector rows = Matrix(cc.r).rowwise().sum();
    CHECK((rows.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("TauFamily") {
  SUBCASE("single state") {
    Matrix g(1, 1);
    g << 0.4;
    TauFamily tau(g, Vector::Constant(1, 0.6));
    CHECK(tau.matrix()(0, 0) == 1.0);
    CHECK(tau.apply(Vector::Constant(1, 3.0))[0] == doctest::Approx(3.0));
  }
  SUBCASE("2x2 arithmetic") {
    Matrix g(2, 2);
    g << 0.0, 0.5, 0.5, 0.0;
    TauFamily tau(g, row_deficits(g));
    Matrix t = tau.matrix();
    CHECK(t(0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(t(0, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(tau.apply(Vector::Unit(2, 0))[0] == doctest::Approx(2.0 / 3.0));
    CHECK(tau.denominator() == doctest::Approx(0.75));
  }
  SUBCASE("random matches direct inversion") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 5; ++rep) {
      Matrix g = oracle::random_substochastic(10, rng);
      Matrix inv = (Matrix::Identity(10, 10) - g).inverse();
      for (Index x = 0; x < 10; ++x) inv.row(x) /= inv.row(x).sum();
      TauFamily tau(g, row_deficits(g));
      CHECK((tau.matrix() - inv).lpNorm<Eigen::Infinity>() < 1e-8);
      Vector q = Vector::LinSpaced(10, 1.0, 10.0);
      CHECK((tau.apply(q) - inv * q).lpNorm<Eigen::Infinity>() < 1e-8);
      // Every choice of the deleted state gives the same family.
      TauFamily other(g, row_deficits(g), 7);
      CHECK((other.matrix() - inv).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
  SUBCASE("stochastic G: all rows equal the stationary vector") {
    std::mt19937_64 rng(24);
    Matrix g = oracle::random_stochastic(6, rng);
    TauFamily tau(g, Vector::Zero(6));
    CHECK(tau.denominator() == 0.0);
    Vector pi = oracle::stationary_dense(g);
    Matrix t = tau.matrix();
    for (Index x = 0; x < 6; ++x) CHECK((t.row(x).transpose() - pi).lpNorm<Eigen::Infinity>() < 1e-12);
  }
  SUBCASE("default deleted state maximizes the row sum") {
    Vector d(3);
    d << 0.3, 0.1, 0.1;
    CHECK(default_deleted_state(d) == 1);
  }
}
