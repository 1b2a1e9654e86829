#include <doctest.h>

#include <random>

#include "cho/error.hpp"
#include "cho/markov.hpp"
#include "support/oracles.hpp"

using namespace cho;

namespace {

TransitionCounts counts_from(const StateSpace& s, const std::vector<std::uint64_t>& raw) {
  TransitionCounts c(s);
  const int k = s.size();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (const auto v = raw[static_cast<std::size_t>(i * k + j)]) c.add(i, j, v);
  return c;
}

// Positive weight on every edge, deterministic per (from, to).
double edge_weight(int i, int j) { return 1.0 + ((i * 7 + j * 3) % 5); }

Eigen::MatrixXd fault_free_chain(int n, int m) {
  const StateSpace s(n, m);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.size(), s.size());
  p(0, 0) = 0.9;
  p(0, n > 0 ? 1 : s.wait()) = 0.1;
  for (int i = 1; i <= n; ++i) p(i, i < n ? i + 1 : s.wait()) = 1.0;
  p(s.wait(), s.wait()) = 0.5;
  p(s.wait(), m > 0 ? s.wait() + 1 : 0) = 0.5;
  for (int j = 1; j <= m; ++j) p(s.wait() + j, j < m ? s.wait() + j + 1 : 0) = 1.0;
  p(s.hof(), 0) = 1.0;
  return p;
}

TransitionMatrix as_matrix(const StateSpace& s, const Eigen::MatrixXd& p) {
  TransitionMatrix m;
  m.space = s;
  m.p = p;
  return m;
}

}  // namespace

TEST_CASE("counts and row normalization") {
  const StateSpace s(2, 1);
  TransitionCounts c(s);
  c.add(0, 0, 3);
  c.add(0, 1);
  c.add(1, 2);
  c.add(2, 3, 2);
  c.add(3, 3);
  c.add(3, 4, 3);
  c.add(4, 0);
  c.add(5, 0);
  CHECK(c.total() == 13u);
  CHECK(c.row_total(3) == 4u);
  const auto occ = c.occupancy();
  CHECK(occ[0] == doctest::Approx(4.0 / 13));

  const TransitionMatrix m = estimate_matrix(c);
  CHECK(m.p(0, 0) == doctest::Approx(0.75));
  CHECK(m.p(3, 4) == doctest::Approx(0.75));
  CHECK(m.count(2, 3) == 2u);
  CHECK(m.unobserved_rows.empty());
  for (int i = 0; i < s.size(); ++i) CHECK(m.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("merge adds counts") {
    TransitionCounts d(s);
    d.add(0, 0, 2);
    c.merge(d);
    CHECK(c.at(0, 0) == 5u);
  }
  SUBCASE("unobserved rows become self-loops") {
    TransitionCounts e(s);
    e.add(0, 0, 1);
    const TransitionMatrix em = estimate_matrix(e);
    CHECK(em.unobserved_rows.size() == 5u);
    CHECK(em.p(2, 2) == 1.0);
  }
  SUBCASE("forbidden transitions are rejected") {
    TransitionCounts bad(s);
    bad.add(0, 3);
    CHECK_THROWS_AS(estimate_matrix(bad), DataError);
  }
  SUBCASE("no observations") { CHECK_THROWS_AS(estimate_matrix(TransitionCounts(s)), DataError); }
}

TEST_CASE("estimation from events") {
  const StateSpace s(1, 0);
  std::vector<TraceEvent> ev;
  auto push = [&](ChoState from, ChoState to) { ev.push_back(TraceEvent{20 * (1 + (std::int64_t)ev.size()), 0, from, to}); };
  push(ChoState::norm(), ChoState::norm());
  push(ChoState::norm(), ChoState::prep(1));
  push(ChoState::prep(1), ChoState::wait());
  push(ChoState::wait(), ChoState::hof());
  push(ChoState::hof(), ChoState::norm());
  const TransitionMatrix m = estimate_matrix(ev, s);
  CHECK(m.p(0, 0) == 0.5);
  CHECK(m.p(2, 3) == 1.0);
  CHECK(m.p(3, 0) == 1.0);
}

TEST_CASE("ergodicity") {
  SUBCASE("ergodic CHO chain") {
    const Eigen::MatrixXd p = oracle::cho_chain(5, 4, edge_weight);
    const auto r = check_ergodic(p);
    CHECK(r.verdict == ChainClass::ergodic);
    REQUIRE(r.lemma_k.has_value());
    const int k = *r.lemma_k;
    Eigen::MatrixXd pk = p;
    for (int i = 1; i < k; ++i) pk *= p;
    const Eigen::MatrixXd pk1 = pk * p;
    for (int i = 0; i < p.rows(); ++i) {
      CHECK(pk(i, i) > 0.0);
      CHECK(pk1(i, i) > 0.0);
    }
  }
  SUBCASE("periodic") {
    Eigen::MatrixXd p(3, 3);
    p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    const auto r = check_ergodic(p);
    CHECK(r.verdict == ChainClass::periodic);
    CHECK(r.period == 3);
    CHECK_FALSE(r.lemma_k.has_value());
    CHECK_THROWS_AS(stationary(p), NonErgodicError);
  }
  SUBCASE("reducible") {
    Eigen::MatrixXd p(3, 3);
    p << 0.5, 0.5, 0, 0, 1, 0, 0, 0.5, 0.5;
    const auto r = check_ergodic(p);
    CHECK(r.verdict == ChainClass::reducible);
    CHECK(r.witness_state >= 1);
    CHECK_THROWS_AS(stationary(p), NonErgodicError);
    CHECK_FALSE(r.describe().empty());
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(check_ergodic(Eigen::MatrixXd::Identity(2, 3)), DataError);
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.4, 0.5, 0.5;
    CHECK_THROWS_AS(check_ergodic(p), DataError);
  }
}

TEST_CASE("stationary solve matches power iteration on random ergodic chains") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + trial % 25;
    const Eigen::MatrixXd p = oracle::random_ergodic(k, rng);
    const StationaryDistribution s = stationary(p);
    const Eigen::VectorXd ref = oracle::power_iteration(p);
    CHECK((s.pi - ref).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(s.pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.pi.minCoeff() >= 0.0);
    CHECK(s.residual < 1e-12);
  }
}

TEST_CASE("unichain solve") {
  const Eigen::MatrixXd p = fault_free_chain(5, 4);
  CHECK(check_ergodic(p).verdict == ChainClass::reducible);
  const auto cls = unique_recurrent_class(p);
  CHECK(cls.size() == 11u);
  const StationaryDistribution s = stationary_unichain(p);
  CHECK(s.pi(11) == 0.0);
  CHECK((s.pi - oracle::power_iteration(p)).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd two(3, 3);
  two << 1, 0, 0, 0, 1, 0, 0.5, 0.5, 0;
  CHECK(unique_recurrent_class(two).empty());
  CHECK_THROWS_AS(stationary_unichain(two), NonErgodicError);
}

TEST_CASE("closed form agrees with the linear solve") {
  SUBCASE("fault-free chains") {
    for (auto [n, m] : {std::pair{5, 4}, std::pair{1, 1}, std::pair{0, 2}, std::pair{3, 0}}) {
      const StateSpace s(n, m);
      const Eigen::MatrixXd p = fault_free_chain(n, m);
      const ClosedFormResult cf = closed_form_pi_hof(as_matrix(s, p));
      REQUIRE(cf.pi_hof.has_value());
      CHECK(*cf.discrepancy <= 1e-9);
      CHECK(std::abs(*cf.pi_hof) <= 1e-9);
      const Eigen::VectorXd ref = oracle::power_iteration(p);
      CHECK(*cf.pi_norm == doctest::Approx(ref(0)).epsilon(1e-9));
      CHECK(*cf.pi_wait == doctest::Approx(ref(s.wait())).epsilon(1e-9));
    }
  }
  SUBCASE("faulty chains") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = trial % 7;
      const int m = (trial / 7) % 5;
      const StateSpace s(n, m);
      const Eigen::MatrixXd p = oracle::cho_chain(n, m, [&](int, int) { return u(rng); });
      const ClosedFormResult cf = closed_form_pi_hof(as_matrix(s, p));
      const Eigen::VectorXd ref = oracle::power_iteration(p);
      CHECK(cf.solved_pi_hof == doctest::Approx(ref(s.hof())).epsilon(1e-9));
      REQUIRE(cf.pi_hof.has_value());
      CHECK(*cf.discrepancy <= 1e-9);
      double phi = 1.0, prod = 1.0;
      for (int i = 1; i <= n; ++i) phi += (prod *= p(i - 1, i));
      CHECK(cf.aux.phi_cf == doctest::Approx(phi).epsilon(1e-12));
    }
  }
  SUBCASE("vanishing beta is reported") {
    // WAIT absorbing: the unichain solve still works, the closed form does not
    const StateSpace s(1, 1);
    Eigen::MatrixXd p = fault_free_chain(1, 1);
    p(s.wait(), s.wait()) = 1.0;
    p(s.wait(), s.wait() + 1) = 0.0;
    const ClosedFormResult cf = closed_form_pi_hof(as_matrix(s, p));
    CHECK_FALSE(cf.pi_hof.has_value());
    CHECK(cf.undefined_reason == "beta = 0");
    CHECK(cf.solved_pi_hof == 0.0);
  }
}

TEST_CASE("sampled counts fall inside binomial regions") {
  const StateSpace s(5, 4);
  const Eigen::MatrixXd p = oracle::cho_chain(5, 4, edge_weight);
  const auto raw = oracle::sample_chain_counts(p, 200'000, 0, 99);
  const TransitionMatrix m = estimate_matrix(counts_from(s, raw));
  // 99 cells at 99.7% coverage: a handful of misses is expected, many is not
  int outside = 0;
  for (int i = 0; i < s.size(); ++i) {
    std::uint64_t row = 0;
    for (int j = 0; j < s.size(); ++j) row += m.count(i, j);
    for (int j = 0; j < s.size(); ++j)
      if (!oracle::within_binomial_region(m.count(i, j), row, p(i, j), 0.997)) ++outside;
  }
  CHECK(outside <= 2);
}

TEST_CASE("A3 reduced chains") {
  const StateSpace s(24, 0);
  CHECK(s.size() == 27);
  const Eigen::MatrixXd p = oracle::cho_chain(24, 0, edge_weight);
  TransitionMatrix est = as_matrix(s, p);
  est.unobserved_rows = {s.wait(), 3};
  const TransitionMatrix direct = a3_chain(est, A3ChainMode::direct_handover);
  const TransitionMatrix over = a3_chain(est, A3ChainMode::hof_override);
  CHECK(direct.p(s.wait(), 0) == 1.0);
  CHECK(over.p(s.wait(), s.hof()) == 1.0);
  CHECK(direct.unobserved_rows == std::vector<int>{3});
  const double hd = stationary(direct.p).pi(s.hof());
  const double ho = stationary(over.p).pi(s.hof());
  CHECK(ho > hd);
  CHECK_THROWS_AS(a3_chain(as_matrix(StateSpace(1, 1), oracle::cho_chain(1, 1, edge_weight)), A3ChainMode::hof_override),
                  InvariantViolation);
}
