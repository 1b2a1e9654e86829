#include <doctest.h>

#include <cmath>

#include "cho/error.hpp"
#include "cho/mobility.hpp"

using namespace cho;

TEST_CASE("distance") {
  CHECK(distance({0, 0}, {3, 4}) == 5.0);
  CHECK(distance({2, 7}, {2, 7}) == 0.0);
  CHECK(distance({50, 0}, {500, 0}) == 450.0);
  CHECK(distance({1, 2}, {-4, 9}) == distance({-4, 9}, {1, 2}));
}

namespace {

MobilityModel linear_model(double v) {
  MobilityModel m;
  m.mode = MobilityMode::linear;
  m.path_from = {0, 0};
  m.path_to = {500, 0};
  m.fixed_velocity_mps = v;
  return m;
}

MobilityModel waypoint_model() {
  MobilityModel m;
  m.mode = MobilityMode::random_waypoint;
  m.region = {0, 0, 500, 1000};
  m.v_min_mps = 0.0;
  m.v_max_mps = 50.0 / 3.6;
  return m;
}

}  // namespace

TEST_CASE("linear mobility") {
  SeededStream rng(0, {1});
  const MobilityModel model = linear_model(10.0);
  MobilityState s = initial_mobility(model, rng);
  CHECK(s.position == Position{0, 0});
  s = step(s, 0.02, model, rng);
  CHECK(s.position.x == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s.position.y == 0.0);

  SUBCASE("reverses at the far end without leaving the segment") {
    bool reached_end = false, returned = false;
    for (int i = 0; i < 3'000; ++i) {
      s = step(s, 0.02, model, rng);
      CHECK(s.position.x >= 0.0);
      CHECK(s.position.x <= 500.0);
      CHECK(s.position.y == 0.0);
      reached_end = reached_end || s.position.x == 500.0;
      returned = returned || (reached_end && s.position.x < 500.0);
    }
    CHECK(reached_end);
    CHECK(returned);
    CHECK(s.waypoint == Position{0, 0});
  }
}

TEST_CASE("zero velocity does not move") {
  SeededStream rng(0, {1});
  const MobilityModel model = linear_model(0.0);
  MobilityState s = initial_mobility(model, rng);
  const MobilityState t = step(s, 0.02, model, rng);
  CHECK(t.position == s.position);
}

TEST_CASE("waypoint arrival") {
  SeededStream rng(5, {1});
  const MobilityModel model = waypoint_model();
  MobilityState s;
  s.mode = MobilityMode::random_waypoint;
  s.position = {100, 100};
  s.waypoint = {100.1, 100};
  s.velocity_mps = 10.0;
  const MobilityState t = step(s, 0.02, model, rng);
  CHECK(t.position == Position{100.1, 100});
  CHECK_FALSE(t.waypoint == s.waypoint);
  CHECK(model.region.contains(t.waypoint));
  CHECK(t.velocity_mps >= model.v_min_mps);
  CHECK(t.velocity_mps <= model.v_max_mps);
}

TEST_CASE("invalid steps") {
  SeededStream rng(5, {1});
  MobilityModel model = waypoint_model();
  MobilityState s = initial_mobility(model, rng);
  CHECK_THROWS_AS(step(s, 0.0, model, rng), std::invalid_argument);
  CHECK_THROWS_AS(step(s, -0.02, model, rng), std::invalid_argument);
  model.region = {0, 0, 500, 0};
  CHECK_THROWS_AS(step(s, 0.02, model, rng), ConfigError);
  CHECK_THROWS_AS(initial_mobility(model, rng), ConfigError);
}

TEST_CASE("waypoint mobility stays in the region over 10^6 steps") {
  SeededStream rng(11, {2});
  MobilityModel model = waypoint_model();
  model.v_min_mps = 5.0;  // keeps legs short enough to visit many waypoints
  MobilityState s = initial_mobility(model, rng);
  bool inside = true, bounded_step = true, speed_ok = true;
  for (int i = 0; i < 1'000'000; ++i) {
    const MobilityState next = step(s, 0.02, model, rng);
    inside = inside && model.region.contains(next.position);
    bounded_step = bounded_step && distance(s.position, next.position) <= s.velocity_mps * 0.02 + 1e-9;
    speed_ok = speed_ok && next.velocity_mps >= model.v_min_mps && next.velocity_mps <= model.v_max_mps;
    s = next;
  }
  CHECK(inside);
  CHECK(bounded_step);
  CHECK(speed_ok);
}

TEST_CASE("mobility is deterministic per seed") {
  const MobilityModel model = waypoint_model();
  SeededStream a(3, {9}), b(3, {9});
  MobilityState sa = initial_mobility(model, a), sb = initial_mobility(model, b);
  for (int i = 0; i < 5000; ++i) {
    sa = step(sa, 0.02, model, a);
    sb = step(sb, 0.02, model, b);
  }
  CHECK(sa.position == sb.position);
}
