#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cho/engine.hpp"
#include "cho/markov.hpp"
#include "cho/metrics.hpp"

using namespace cho;

namespace {

SimConfig short_multicell(std::uint64_t seed) {
  SimConfig c = preset_multicell();
  c.n_ues = 6;
  c.duration_ms = 4'000;
  c.warmup_ms = 0;
  c.seed = seed;
  return c;
}

bool same_event(const TraceEvent& a, const TraceEvent& b) {
  return a.time_ms == b.time_ms && a.ue_id == b.ue_id && a.from == b.from && a.to == b.to && a.cause == b.cause &&
         a.serving_gnb == b.serving_gnb && a.target_gnb == b.target_gnb && a.p1_dbm == b.p1_dbm &&
         a.p2_dbm == b.p2_dbm && a.sinr_db == b.sinr_db;
}

bool same_trace(const RunTrace& a, const RunTrace& b) {
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t i = 0; i < a.events.size(); ++i)
    if (!same_event(a.events[i], b.events[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("parallel kernel reproduces the serial reference") {
  const SimConfig c = short_multicell(4);
  const RunTrace ref = run_serial(c);
  CHECK(ref.events.size() == 6u * 200u);
  for (int threads : {1, 2, 4}) CHECK(same_trace(ref, run_parallel(c, threads)));
  CHECK(ref.fingerprint == fingerprint(c));
  CHECK(ref.space == StateSpace(5, 4));
}

TEST_CASE("seeds") {
  CHECK(same_trace(run_serial(short_multicell(8)), run_serial(short_multicell(8))));
  CHECK_FALSE(same_trace(run_serial(short_multicell(8)), run_serial(short_multicell(9))));

  SUBCASE("UE streams do not depend on the UE count") {
    SimConfig a = short_multicell(3);
    SimConfig b = a;
    b.n_ues = 2;
    const RunTrace ta = run_serial(a);
    const RunTrace tb = run_serial(b);
    std::vector<TraceEvent> first_two;
    for (const auto& e : ta.events)
      if (e.ue_id < 2) first_two.push_back(e);
    REQUIRE(first_two.size() == tb.events.size());
    for (std::size_t i = 0; i < tb.events.size(); ++i) CHECK(same_event(first_two[i], tb.events[i]));
  }
}

TEST_CASE("trace invariants") {
  SimConfig c = short_multicell(1);
  c.duration_ms = 20'000;
  c.fading = Fading::rayleigh();
  const RunTrace t = run_serial(c);
  const StateSpace& s = t.space;
  std::map<int, TraceEvent> last;
  std::set<int> reached;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const TraceEvent& e = t.events[i];
    CHECK(e.time_ms == 20 * static_cast<std::int64_t>(i / 6 + 1));
    CHECK(e.ue_id == static_cast<int>(i % 6));
    CHECK(s.allowed(e.from, e.to));
    CHECK(e.serving_gnb != e.target_gnb);
    CHECK(e.serving_gnb >= 0);
    CHECK(e.target_gnb < 8);
    if (auto it = last.find(e.ue_id); it != last.end()) {
      CHECK(it->second.to == e.from);
      if (e.from.phase == Phase::exec || e.from.phase == Phase::wait)
        CHECK(e.target_gnb == it->second.target_gnb);
      if (it->second.cause != Cause::exec_complete && it->second.cause != Cause::hof_recover &&
          it->second.cause != Cause::rlf_norm)
        CHECK(e.serving_gnb == it->second.serving_gnb);
    } else {
      CHECK(e.from == ChoState::norm());
    }
    if (e.cause == Cause::prep_cond) CHECK(e.p2_dbm > e.p1_dbm + c.cho.o_prep_db);
    if (e.cause == Cause::exec_cond) CHECK(e.p2_dbm > e.p1_dbm + c.cho.o_exec_db);
    if (e.cause == Cause::prep_violation) CHECK_FALSE(e.p2_dbm > e.p1_dbm + c.cho.o_prep_db);
    reached.insert(s.ordinal(e.to));
    last[e.ue_id] = e;
  }
  CHECK(static_cast<int>(reached.size()) <= s.size());
  CHECK(reached.count(s.wait()) == 1);
}

TEST_CASE("deterministic two-gNB walk without fading") {
  const double v = 10.0;
  SimConfig c = preset_two_gnb(v, Fading::none());
  c.log_links = true;
  const RunTrace t = run_serial(c);
  REQUIRE(t.events.size() == 2500u);
  REQUIRE(t.links.size() == t.events.size());
  const double noise = dbm_to_watts(c.noise_dbm);
  for (std::size_t k = 0; k < t.events.size(); k += 97) {
    const TraceEvent& e = t.events[k];
    const double x = v * 0.02 * static_cast<double>(k + 1);
    const double d0 = std::max(x, 1.0);
    const double d1 = std::max(500.0 - x, 1.0);
    const double r0 = dbm_to_watts(40.0) / (d0 * d0);
    const double r1 = dbm_to_watts(40.0) / (d1 * d1);
    CHECK(t.links[k].rsrp_dbm[0] == doctest::Approx(watts_to_dbm(r0)).epsilon(1e-9));
    CHECK(t.links[k].rsrp_dbm[1] == doctest::Approx(watts_to_dbm(r1)).epsilon(1e-9));
    const double serving = e.serving_gnb == 0 ? r0 : r1;
    const double other = e.serving_gnb == 0 ? r1 : r0;
    CHECK(e.sinr_db == doctest::Approx(10.0 * std::log10(serving / (other + noise))).epsilon(1e-9));
  }
  std::vector<TraceEvent> done;
  for (const auto& e : t.events)
    if (e.cause == Cause::exec_complete) done.push_back(e);
  REQUIRE(done.size() == 1u);
  CHECK(done[0].target_gnb == 1);
  CHECK(t.events.back().serving_gnb == 1);
  CHECK(hof_probability(t.events) == 0.0);
  const auto lat = latency(t.events);
  REQUIRE(lat.size() == 1u);
  CHECK(lat[0] >= 200.0);
  // prep starts once P2 > P1 + 1 dB and execution needs P2 > P1 + 6 dB; without fading
  // both crossings are fixed points on the path; execution then needs four more samples
  const double x_prep = 500.0 / (1.0 + std::pow(10.0, -1.0 / 20.0));
  const double x_exec = 500.0 / (1.0 + std::pow(10.0, -6.0 / 20.0));
  CHECK(std::abs(lat[0] - ((x_exec - x_prep) / v * 1000.0 + 80.0)) <= 20.0);
}

TEST_CASE("streaming fold sees the same events as the stored trace") {
  const SimConfig c = short_multicell(6);
  const RunTrace t = run_serial(c);
  TransitionCounts direct(t.space);
  for (const auto& e : t.events) direct.on_event(e);
  const auto folds = fold_per_ue(c, TransitionCounts(t.space), 2);
  TransitionCounts merged(t.space);
  for (const auto& f : folds) merged.merge(f);
  for (int i = 0; i < t.space.size(); ++i)
    for (int j = 0; j < t.space.size(); ++j) CHECK(merged.at(i, j) == direct.at(i, j));
}
