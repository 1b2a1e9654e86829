#include "cho/mobility.hpp"

#include <cmath>
#include <stdexcept>

#include "cho/error.hpp"

namespace cho {

double distance(Position p, Position q) { return std::hypot(p.x - q.x, p.y - q.y); }

namespace {

void require_region(const MobilityModel& model) {
  if (!(model.region.area() > 0.0)) throw ConfigError("region", "waypoint mobility needs a region with nonzero area");
}

Position uniform_point(const Region& r, SeededStream& rng) {
  return {rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max)};
}

double leg_velocity(const MobilityModel& model, SeededStream& rng) {
  if (model.fixed_velocity_mps) return *model.fixed_velocity_mps;
  return rng.uniform(model.v_min_mps, model.v_max_mps);
}

}  // namespace

MobilityState initial_mobility(const MobilityModel& model, SeededStream& rng) {
  MobilityState s;
  s.mode = model.mode;
  if (model.mode == MobilityMode::linear) {
    s.position = model.path_from;
    s.waypoint = model.path_to;
    s.velocity_mps = model.fixed_velocity_mps.value_or(model.v_max_mps);
    return s;
  }
  require_region(model);
  s.position = uniform_point(model.region, rng);
  s.waypoint = uniform_point(model.region, rng);
  s.velocity_mps = leg_velocity(model, rng);
  return s;
}

MobilityState step(const MobilityState& state, double dt_s, const MobilityModel& model, SeededStream& rng) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("mobility step: dt must be > 0");
  if (state.mode == MobilityMode::random_waypoint) require_region(model);

  MobilityState next = state;
  const double travel = state.velocity_mps * dt_s;
  if (travel <= 0.0) return next;

  const double remaining = distance(state.position, state.waypoint);
  if (remaining <= travel) {
    next.position = state.waypoint;
    if (state.mode == MobilityMode::linear) {
      next.waypoint = (state.waypoint == model.path_to) ? model.path_from : model.path_to;
    } else {
      next.waypoint = uniform_point(model.region, rng);
      next.velocity_mps = leg_velocity(model, rng);
    }
    return next;
  }
  const double f = travel / remaining;
  next.position.x += f * (state.waypoint.x - state.position.x);
  next.position.y += f * (state.waypoint.y - state.position.y);
  return next;
}

}  // namespace cho
