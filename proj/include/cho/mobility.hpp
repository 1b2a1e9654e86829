#pragma once

#include <optional>

#include "cho/rng.hpp"

namespace cho {

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

/// Euclidean distance in meters.
double distance(Position p, Position q);

struct Region {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool contains(Position p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

enum class MobilityMode { linear, random_waypoint };

/// Static description of how UEs move.
/// Linear mode shuttles between `path_from` and `path_to`, reversing at each end.
/// Waypoint mode draws uniform waypoints in `region` with zero pause time and a
/// uniform speed in [v_min, v_max] per leg, unless `fixed_velocity_mps` is set.
struct MobilityModel {
  MobilityMode mode = MobilityMode::random_waypoint;
  Region region;
  double v_min_mps = 0.0;
  double v_max_mps = 0.0;
  std::optional<double> fixed_velocity_mps;
  Position path_from;
  Position path_to;
};

struct MobilityState {
  MobilityMode mode = MobilityMode::random_waypoint;
  Position position;
  double velocity_mps = 0.0;
  Position waypoint;  // current leg destination (segment endpoint in linear mode)
};

/// Initial state: uniform position and first leg (waypoint mode) or the start
/// of the path heading to `path_to` (linear mode).
MobilityState initial_mobility(const MobilityModel& model, SeededStream& rng);

/// Advance by `dt_s`. Displacement is velocity * dt, clamped at the leg end;
/// arriving at a waypoint draws the next leg. Throws ConfigError on a
/// zero-area region in waypoint mode, std::invalid_argument on dt <= 0.
MobilityState step(const MobilityState& state, double dt_s, const MobilityModel& model, SeededStream& rng);

}  // namespace cho
