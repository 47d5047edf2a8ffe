#include <doctest.h>

#include <random>

#include "mctrunc/ctmc.hpp"
#include "mctrunc/errors.hpp"
#include "mctrunc/log.hpp"
#include "mctrunc/models/toggle.hpp"
#include "support/host.hpp"
#include "support/oracles.hpp"

using namespace mctrunc;

namespace {

Truncation truncate_jump(const EmbeddedChain& chain, int k, int a) {
  return enumerate(chain, [a](const State& s) { return s[0] < a; }, [k](const State& s) { return s[0] < k; });
}

}  // namespace

TEST_CASE("embed: two-state process") {
  Matrix q(2, 2);
  q << 0.0, 3.0, 1.0, 0.0;
  host::RateChain m(q);
  const auto chain = embed(m);
  std::vector<Transition> row;
  chain.transitions(State{0}, row);
  REQUIRE(row.size() == 1);
  CHECK(row[0].to == State{1});
  CHECK(row[0].prob == 1.0);
  const Vector pi = oracle::stationary_dense(oracle::embedded_matrix(q));
  const Vector nu = jump_distribution(pi, (Vector(2) << 3.0, 1.0).finished());
  CHECK(nu[0] == doctest::Approx(0.25));
  CHECK(nu[1] == doctest::Approx(0.75));

  host::RateChain absorbing((Matrix(2, 2) << 0.0, 1.0, 0.0, 0.0).finished());
  row.clear();
  CHECK_THROWS_AS(embed(absorbing).transitions(State{1}, row), AssumptionViolation);
}

TEST_CASE("jump_distribution: birth-death process matches nu Q = 0") {
  Matrix rates = Matrix::Zero(5, 5);
  for (int i = 0; i < 4; ++i) {
    rates(i, i + 1) = 2.0 + i;
    rates(i + 1, i) = 1.0 + 0.5 * i;
  }
  const Vector nu_exact = oracle::stationary_generator(oracle::generator(rates));
  const Vector pi = oracle::stationary_dense(oracle::embedded_matrix(rates));
  const Vector lambda = rates.rowwise().sum();
  CHECK((jump_distribution(pi, lambda) - nu_exact).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS_AS(jump_distribution(pi, Vector::Ones(3)), ConfigError);
}

TEST_CASE("toggle switch: embedded rows and transformed rewards") {
  ToggleSwitchModel m(20.0, 1.0);
  const auto chain = embed(m);
  std::vector<Transition> row;
  chain.transitions(State{0, 0}, row);
  REQUIRE(row.size() == 2);
  for (const auto& tr : row) CHECK(tr.prob == doctest::Approx(0.5));
  const StateFunction total = [](const State& s) { return static_cast<double>(s[0] + s[1]); };
  CHECK(transform_reward(total, m)(State{4, 4}) == doctest::Approx(0.5));
  const auto t = enumerate(chain, [](const State& s) { return s[0] + s[1] < 3; }, [](const State& s) { return s[0] + s[1] == 0; });
  const Vector lambda = exit_rates(m, t);
  CHECK(lambda[*t.space.index_of(State{0, 0})] == doctest::Approx(40.0));
}

TEST_CASE("toggle switch: analytic drift holds beyond the radii") {
  for (double lambda : {20.0, 90.0}) {
    ToggleSwitchModel m(lambda, 1.0);
    const auto L = toggle_lyapunov(m);
    const auto band = [](std::int64_t lo, std::int64_t hi) {
      std::vector<State> out;
      for (const auto& s : simplex_ball(hi)) {
        if (s[0] + s[1] >= lo) out.push_back(s);
      }
      return out;
    };
    const StateFunction one = [](const State&) { return 1.0; };
    for (const auto& x : band(L.n1, L.n1 + 40)) CHECK(ctmc_drift_margin(m, L.spec.g1, L.spec.r, x) >= 0.0);
    for (const auto& x : band(L.n2, L.n2 + 40)) CHECK(ctmc_drift_margin(m, L.spec.g2, one, x) >= 0.0);
  }
}

TEST_CASE("verify_ctmc_drift: Q-form and embedded forms agree") {
  ToggleSwitchModel m(20.0, 1.0);
  const auto L = toggle_lyapunov(m);
  const auto k = construct_K_ctmc(m, L.spec);
  REQUIRE(!k.empty());
  const StatePredicate in_k = [&](const State& x) { return std::binary_search(k.begin(), k.end(), x); };
  CtmcDriftOptions opt;
  opt.require_rate_envelope = false;
  std::string warned;
  set_log_sink([&](const std::string& msg) { warned = msg; });
  const auto rep = verify_ctmc_drift(m, L.spec.g1, L.spec.r, in_k, simplex_ball(std::max(L.n1, L.n2) + 20), opt);
  CHECK(warned.find("skipped") != std::string::npos);
  CHECK(rep.consistent);
  CHECK(rep.q_form.verified());
  CHECK(rep.r_form.verified());
  CHECK(!rep.rate_envelope_checked);

  const auto full = verify_ctmc_drift(m, L.spec.g1, L.spec.r, nullptr, simplex_ball(30), opt);
  CHECK(full.consistent);
  CHECK(!full.q_form.verified());
  set_log_sink(nullptr);

  // Margins scale with the exit rate.
  const EmbeddedChain chain(m);
  const State x{7, 3};
  const double mq = ctmc_drift_margin(m, L.spec.g1, L.spec.r, x);
  const double mr = drift_margin(chain, L.spec.g1, transform_reward(L.spec.r, m), x);
  CHECK(mr * m.exit_rate(x) == doctest::Approx(mq).epsilon(1e-12));
}

TEST_CASE("verify_ctmc_drift: rate envelope requirement") {
  ToggleSwitchModel m(20.0, 1.0);
  const auto L = toggle_lyapunov(m);
  CHECK_THROWS_AS(verify_ctmc_drift(m, L.spec.g1, L.spec.r, nullptr, simplex_ball(5)), AssumptionViolation);

  Matrix rates = Matrix::Zero(3, 3);
  rates(0, 1) = rates(1, 2) = rates(2, 0) = 1.0;
  host::RateChain cyc(rates);
  const StateFunction two = [](const State&) { return 2.0; };
  const StateFunction zero = [](const State&) { return 0.0; };
  const auto rep = verify_ctmc_drift(cyc, zero, two, nullptr, {State{0}, State{1}, State{2}});
  CHECK(rep.rate_envelope_checked);
  CHECK(rep.q_form.violations.size() == 3);
  CHECK(rep.consistent);
}

TEST_CASE("ctmc_moment_bound: exceeds the excess on the core") {
  ToggleSwitchModel m(20.0, 1.0);
  const auto L = toggle_lyapunov(m);
  const auto core = simplex_ball(L.n3 + 1);
  const double c = ctmc_moment_bound(m, L.g3, L.w, core);
  for (const auto& x : simplex_ball(10)) CHECK(-ctmc_drift_margin(m, L.g3, L.w, x) <= c);
  CHECK(c > 0.0);
}

TEST_CASE("ctmc_expectation_bounds: random finite processes") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 8 + trial % 8;
    const int k = 1 + trial % 3;
    const int a = n - 1 - trial % 3;
    const Matrix rates = oracle::random_rates(n, rng);
    host::RateChain m(rates);
    const EmbeddedChain chain(m);
    const Matrix r_mat = oracle::embedded_matrix(rates);
    const Vector lambda = rates.rowwise().sum() - rates.diagonal();
    const Vector nu = oracle::stationary_generator(oracle::generator(rates));

    std::uniform_real_distribution<double> u(0.5, 4.0);
    Vector r(n), f(n);
    for (int i = 0; i < n; ++i) {
      r[i] = u(rng);
      f[i] = (i % 2 ? 0.6 : -0.9) * r[i];
    }
    const Truncation t = truncate_jump(chain, k, a);
    Censoring c(t);
    const Vector g1 = host::host_lyapunov(r_mat, k, r.cwiseQuotient(lambda), 1.5);
    const Vector g2 = host::host_lyapunov(r_mat, k, lambda.cwiseInverse(), 1.5);
    const Vector h1 = compute_h(t, host::table(g1));
    const Vector h2 = compute_h(t, host::table(g2));

    const BoundReport rep = ctmc_expectation_bounds(c, m, host::table(f), host::table(r), h1, h2);
    const double nf = nu.dot(f);
    CHECK(rep.lower <= nf + 1e-12);
    CHECK(rep.upper >= nf - 1e-12);
    CHECK(std::abs(rep.approx - nf) <= rep.approx_error + 1e-12);
    CHECK(rep.provenance.at("process") == "jump");

    const BoundReport rr = ctmc_expectation_bounds(c, m, host::table(r), host::table(r), h1, h2);
    CHECK(rr.lower <= nu.dot(r) + 1e-12);
    CHECK(rr.upper >= nu.dot(r) - 1e-12);
  }
}

TEST_CASE("ctmc_expectation_bounds: degenerate cases") {
  std::mt19937_64 rng(52);
  const Matrix rates = oracle::random_rates(6, rng);
  host::RateChain m(rates);
  const EmbeddedChain chain(m);
  const Truncation t = truncate_jump(chain, 2, 6);
  Censoring c(t);
  const Vector zero = Vector::Zero(6);
  const StateFunction lam = [&](const State& x) { return m.exit_rate(x); };
  const StateFunction nothing = [](const State&) { return 0.0; };

  // A = S: f = lambda gives sum nu lambda = 1 / sum pi (1 / lambda) exactly.
  const Vector nu = oracle::stationary_generator(oracle::generator(rates));
  const Vector lambda = rates.rowwise().sum() - rates.diagonal();
  const BoundReport rep = ctmc_expectation_bounds(c, m, lam, lam, zero, zero);
  CHECK(rep.lower == doctest::Approx(nu.dot(lambda)).epsilon(1e-10));
  CHECK(rep.upper == doctest::Approx(nu.dot(lambda)).epsilon(1e-10));
  CHECK(rep.tv_bound <= 1e-10 * nu.dot(lambda));

  const BoundReport z = ctmc_expectation_bounds(c, m, nothing, lam, zero, zero);
  CHECK(std::abs(z.lower) <= 1e-14);
  CHECK(std::abs(z.upper) <= 1e-14);
}
