#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cho/channel.hpp"
#include "cho/fsm.hpp"
#include "cho/mobility.hpp"

namespace cho {

struct GnbSite {
  int id = 0;
  Position position;
  double tx_power_dbm = 40.0;
};

/// How per-UE tallies are combined into one report.
enum class MetricsAggregation { pooled, per_ue };

/// Complete scenario description. Powers are kept in dBm here and converted to
/// watts once when a run starts.
struct SimConfig {
  std::string preset = "custom";

  std::vector<GnbSite> gnbs;
  double min_gnb_spacing_m = 0.0;  // checked when > 0
  double max_gnb_spacing_m = 0.0;  // checked when > 0
  int n_ues = 1;
  Region region;

  Fading fading = Fading::rician(3.0);
  double pathloss_exponent = 2.0;
  double noise_dbm = -114.0;
  double min_distance_m = 1.0;
  int antennas = 1;
  double carrier_ghz = 28.0;     // metadata only
  double bandwidth_mhz = 100.0;  // metadata only

  MobilityMode mobility_mode = MobilityMode::random_waypoint;
  double v_min_mps = 0.0;
  double v_max_mps = 50.0 / 3.6;
  std::optional<double> fixed_velocity_mps;
  int path_from_gnb = 0;
  int path_to_gnb = 1;

  MobilityParams cho;
  bool reselect_target_in_wait = false;
  RlfParams rlf;

  std::int64_t duration_ms = 60'000;
  std::int64_t warmup_ms = 1'000;
  std::uint64_t seed = 0;
  std::vector<double> packet_rates{50.0, 100.0, 250.0};
  MetricsAggregation aggregation = MetricsAggregation::pooled;
  bool log_links = false;

  std::int64_t ticks() const { return duration_ms / cho.t_sample_ms; }
  MobilityModel mobility_model() const;
};

/// Throws ConfigError naming the first invalid field.
void validate(const SimConfig& config);

/// Two gNBs 500 m apart, one UE travelling gNB 0 -> gNB 1 once.
SimConfig preset_two_gnb(double velocity_mps, Fading fading);
/// 8 gNBs in a 500 x 1000 m area, 20 random-waypoint UEs, 28 GHz metadata.
SimConfig preset_multicell();
/// Three gNBs 500 m apart on a line, one UE at constant speed from the first to
/// the third, with CHO parameters reduced to an A3 trigger (Hys, TTT).
SimConfig preset_a3_linear(std::int64_t ttt_ms, double hys_db, double velocity_mps = 22.0,
                           Fading fading = Fading::rayleigh());

std::vector<std::string> preset_names();
/// Throws ConfigError("scenario.preset") for unknown names.
SimConfig preset_by_name(const std::string& name);

/// Sets one `section.key` value. Throws ConfigError for unknown keys or bad values.
void apply_setting(SimConfig& config, const std::string& key, const std::string& value);

/// Parses "section.key=value".
std::pair<std::string, std::string> split_override(const std::string& text);

/// Parses INI text: `[scenario] preset` selects the base, remaining keys are
/// applied in file order, then `overrides`. The result is validated.
SimConfig parse_config(const std::string& ini_text,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});
SimConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Canonical INI dump; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const SimConfig& config);

/// FNV-1a of the canonical dump.
std::uint64_t fingerprint(const SimConfig& config);

}  // namespace cho
