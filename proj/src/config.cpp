#include "cho/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cho/error.hpp"

namespace cho {

MobilityModel SimConfig::mobility_model() const {
  MobilityModel m;
  m.mode = mobility_mode;
  m.region = region;
  m.v_min_mps = v_min_mps;
  m.v_max_mps = v_max_mps;
  m.fixed_velocity_mps = fixed_velocity_mps;
  if (path_from_gnb >= 0 && path_from_gnb < static_cast<int>(gnbs.size())) m.path_from = gnbs[path_from_gnb].position;
  if (path_to_gnb >= 0 && path_to_gnb < static_cast<int>(gnbs.size())) m.path_to = gnbs[path_to_gnb].position;
  return m;
}

void validate(const SimConfig& c) {
  if (c.gnbs.size() < 2) throw ConfigError("gnbs.positions", "at least two gNBs are required");
  for (const auto& g : c.gnbs) {
    if (!std::isfinite(g.position.x) || !std::isfinite(g.position.y))
      throw ConfigError("gnbs.positions", "gNB coordinates must be finite");
    if (!std::isfinite(g.tx_power_dbm)) throw ConfigError("gnbs.tx_power_dbm", "must be finite");
  }
  for (std::size_t i = 0; i < c.gnbs.size(); ++i) {
    for (std::size_t j = i + 1; j < c.gnbs.size(); ++j) {
      const double d = distance(c.gnbs[i].position, c.gnbs[j].position);
      if (d <= 0.0) throw ConfigError("gnbs.positions", fmt::format("gNBs {} and {} coincide", i, j));
      if (c.min_gnb_spacing_m > 0.0 && d < c.min_gnb_spacing_m)
        throw ConfigError("gnbs.min_spacing_m",
                          fmt::format("gNBs {} and {} are {:.1f} m apart (< {} m)", i, j, d, c.min_gnb_spacing_m));
      if (c.max_gnb_spacing_m > 0.0 && d > c.max_gnb_spacing_m)
        throw ConfigError("gnbs.max_spacing_m",
                          fmt::format("gNBs {} and {} are {:.1f} m apart (> {} m)", i, j, d, c.max_gnb_spacing_m));
    }
  }
  if (c.n_ues < 1) throw ConfigError("scenario.n_ues", "must be >= 1");
  if (c.fading.kind == FadingKind::rician && !std::isfinite(c.fading.k_factor_db))
    throw ConfigError("channel.k_factor_db", "must be finite");
  if (!(c.pathloss_exponent > 0.0)) throw ConfigError("channel.pathloss_exponent", "must be > 0");
  if (!std::isfinite(c.noise_dbm)) throw ConfigError("channel.noise_dbm", "must be finite");
  if (!(c.min_distance_m > 0.0)) throw ConfigError("channel.min_distance_m", "must be > 0");
  if (c.antennas < 1) throw ConfigError("channel.antennas", "must be >= 1");

  if (c.mobility_mode == MobilityMode::random_waypoint) {
    if (!(c.region.area() > 0.0)) throw ConfigError("region", "waypoint mobility needs a region with nonzero area");
  } else {
    const int b = static_cast<int>(c.gnbs.size());
    if (c.path_from_gnb < 0 || c.path_from_gnb >= b) throw ConfigError("mobility.path_from_gnb", "no such gNB");
    if (c.path_to_gnb < 0 || c.path_to_gnb >= b) throw ConfigError("mobility.path_to_gnb", "no such gNB");
    if (c.path_from_gnb == c.path_to_gnb) throw ConfigError("mobility.path_to_gnb", "path endpoints must differ");
  }
  if (!(c.v_min_mps >= 0.0)) throw ConfigError("mobility.v_min_mps", "must be >= 0");
  if (!(c.v_max_mps >= c.v_min_mps)) throw ConfigError("mobility.v_max_mps", "must be >= v_min_mps");
  if (c.fixed_velocity_mps && !(*c.fixed_velocity_mps >= 0.0))
    throw ConfigError("mobility.velocity_mps", "must be >= 0");

  c.cho.validate();
  c.rlf.validate();
  if (c.rlf.frame_ms != c.cho.t_sample_ms)
    throw ConfigError("rlf.frame_ms", "the RLF monitor runs once per sample; frame_ms must equal cho.t_sample_ms");

  if (c.duration_ms <= 0) throw ConfigError("scenario.duration_ms", "must be > 0");
  if (c.duration_ms % c.cho.t_sample_ms != 0)
    throw ConfigError("scenario.duration_ms", "must be a multiple of cho.t_sample_ms");
  if (c.warmup_ms < 0 || c.warmup_ms >= c.duration_ms)
    throw ConfigError("scenario.warmup_ms", "must lie in [0, duration_ms)");
  for (double r : c.packet_rates)
    if (!(r >= 0.0)) throw ConfigError("traffic.packet_rates", "rates must be >= 0");
}

namespace {

std::int64_t round_up_to_sample(double ms, std::int64_t sample) {
  return static_cast<std::int64_t>(std::ceil(ms / static_cast<double>(sample) - 1e-9)) * sample;
}

}  // namespace

SimConfig preset_multicell() {
  SimConfig c;
  c.preset = "multicell";
  // Fixed staggered layout: pairwise spacing in [114, 448] m.
  const Position sites[] = {{150, 300}, {350, 357}, {150, 414}, {350, 471},
                            {150, 529}, {350, 586}, {150, 643}, {350, 700}};
  for (int i = 0; i < 8; ++i) c.gnbs.push_back({i, sites[i], 40.0});
  c.min_gnb_spacing_m = 50.0;
  c.max_gnb_spacing_m = 500.0;
  c.n_ues = 20;
  c.region = {0.0, 0.0, 500.0, 1000.0};
  c.fading = Fading::rician(3.0);
  c.mobility_mode = MobilityMode::random_waypoint;
  c.v_min_mps = 0.0;
  c.v_max_mps = 50.0 / 3.6;
  c.duration_ms = 60'000;
  c.warmup_ms = 1'000;
  return c;
}

SimConfig preset_two_gnb(double velocity_mps, Fading fading) {
  if (!(velocity_mps > 0.0)) throw ConfigError("mobility.velocity_mps", "two-gNB preset needs velocity > 0");
  SimConfig c;
  c.preset = "two_gnb";
  c.gnbs = {{0, {0.0, 0.0}, 40.0}, {1, {500.0, 0.0}, 40.0}};
  c.min_gnb_spacing_m = 50.0;
  c.max_gnb_spacing_m = 500.0;
  c.n_ues = 1;
  c.region = {0.0, -250.0, 500.0, 250.0};
  c.fading = fading;
  c.mobility_mode = MobilityMode::linear;
  c.fixed_velocity_mps = velocity_mps;
  c.v_min_mps = velocity_mps;
  c.v_max_mps = velocity_mps;
  c.path_from_gnb = 0;
  c.path_to_gnb = 1;
  c.duration_ms = round_up_to_sample(500.0 / velocity_mps * 1000.0, c.cho.t_sample_ms);
  c.warmup_ms = 0;
  return c;
}

SimConfig preset_a3_linear(std::int64_t ttt_ms, double hys_db, double velocity_mps, Fading fading) {
  if (!(velocity_mps > 0.0)) throw ConfigError("mobility.velocity_mps", "A3 preset needs velocity > 0");
  SimConfig c;
  c.preset = "a3_linear";
  c.gnbs = {{0, {0.0, 0.0}, 40.0}, {1, {500.0, 0.0}, 40.0}, {2, {1000.0, 0.0}, 40.0}};
  c.min_gnb_spacing_m = 50.0;
  c.max_gnb_spacing_m = 0.0;
  c.n_ues = 1;
  c.region = {0.0, -250.0, 1000.0, 250.0};
  c.fading = fading;
  c.mobility_mode = MobilityMode::linear;
  c.fixed_velocity_mps = velocity_mps;
  c.v_min_mps = velocity_mps;
  c.v_max_mps = velocity_mps;
  c.path_from_gnb = 0;
  c.path_to_gnb = 2;
  c.cho = a3_reduce(c.cho, hys_db, ttt_ms);
  c.duration_ms = round_up_to_sample(1000.0 / velocity_mps * 1000.0, c.cho.t_sample_ms);
  c.warmup_ms = 0;
  return c;
}

std::vector<std::string> preset_names() { return {"multicell", "two_gnb", "a3_linear"}; }

SimConfig preset_by_name(const std::string& name) {
  if (name == "multicell") return preset_multicell();
  if (name == "two_gnb") return preset_two_gnb(10.0, Fading::rayleigh());
  if (name == "a3_linear") return preset_a3_linear(480, 11.0);
  throw ConfigError("scenario.preset", "unknown preset '" + name + "'");
}

namespace {

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text, const char* separators) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(separators), boost::algorithm::token_compress_on);
  std::vector<double> out;
  for (const auto& p : parts) {
    if (boost::algorithm::trim_copy(p).empty()) continue;
    out.push_back(parse_double(key, p));
  }
  return out;
}

std::vector<GnbSite> parse_sites(const std::string& key, const std::string& text) {
  std::vector<std::string> entries;
  boost::algorithm::split(entries, text, boost::algorithm::is_any_of(";"));
  std::vector<GnbSite> sites;
  for (const auto& e : entries) {
    if (boost::algorithm::trim_copy(e).empty()) continue;
    const auto v = parse_list(key, e, " \t,");
    if (v.size() != 2 && v.size() != 3) throw ConfigError(key, "each gNB needs 'x y' or 'x y tx_dbm'");
    GnbSite g;
    g.id = static_cast<int>(sites.size());
    g.position = {v[0], v[1]};
    if (v.size() == 3) g.tx_power_dbm = v[2];
    sites.push_back(g);
  }
  return sites;
}

using Setter = std::function<void(SimConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario.preset", [](SimConfig& c, auto&, auto& v) { c.preset = boost::algorithm::trim_copy(v); }},
      {"scenario.n_ues", [](SimConfig& c, auto& k, auto& v) { c.n_ues = static_cast<int>(parse_int(k, v)); }},
      {"scenario.duration_ms", [](SimConfig& c, auto& k, auto& v) { c.duration_ms = parse_int(k, v); }},
      {"scenario.warmup_ms", [](SimConfig& c, auto& k, auto& v) { c.warmup_ms = parse_int(k, v); }},
      {"scenario.seed", [](SimConfig& c, auto& k, auto& v) { c.seed = parse_uint(k, v); }},
      {"scenario.log_links", [](SimConfig& c, auto& k, auto& v) { c.log_links = parse_bool(k, v); }},
      {"scenario.aggregation",
       [](SimConfig& c, auto& k, auto& v) {
         const auto t = boost::algorithm::trim_copy(v);
         if (t == "pooled") c.aggregation = MetricsAggregation::pooled;
         else if (t == "per_ue") c.aggregation = MetricsAggregation::per_ue;
         else throw ConfigError(k, "expected pooled or per_ue");
       }},
      {"gnbs.positions",
       [](SimConfig& c, auto& k, auto& v) { c.gnbs = parse_sites(k, v); }},
      {"gnbs.tx_power_dbm",
       [](SimConfig& c, auto& k, auto& v) {
         const double tx = parse_double(k, v);
         for (auto& g : c.gnbs) g.tx_power_dbm = tx;
       }},
      {"gnbs.min_spacing_m", [](SimConfig& c, auto& k, auto& v) { c.min_gnb_spacing_m = parse_double(k, v); }},
      {"gnbs.max_spacing_m", [](SimConfig& c, auto& k, auto& v) { c.max_gnb_spacing_m = parse_double(k, v); }},
      {"region.x_min", [](SimConfig& c, auto& k, auto& v) { c.region.x_min = parse_double(k, v); }},
      {"region.y_min", [](SimConfig& c, auto& k, auto& v) { c.region.y_min = parse_double(k, v); }},
      {"region.x_max", [](SimConfig& c, auto& k, auto& v) { c.region.x_max = parse_double(k, v); }},
      {"region.y_max", [](SimConfig& c, auto& k, auto& v) { c.region.y_max = parse_double(k, v); }},
      {"channel.fading",
       [](SimConfig& c, auto&, auto& v) {
         c.fading = parse_fading(boost::algorithm::trim_copy(v), c.fading.k_factor_db);
       }},
      {"channel.k_factor_db", [](SimConfig& c, auto& k, auto& v) { c.fading.k_factor_db = parse_double(k, v); }},
      {"channel.pathloss_exponent",
       [](SimConfig& c, auto& k, auto& v) { c.pathloss_exponent = parse_double(k, v); }},
      {"channel.noise_dbm", [](SimConfig& c, auto& k, auto& v) { c.noise_dbm = parse_double(k, v); }},
      {"channel.min_distance_m", [](SimConfig& c, auto& k, auto& v) { c.min_distance_m = parse_double(k, v); }},
      {"channel.antennas",
       [](SimConfig& c, auto& k, auto& v) { c.antennas = static_cast<int>(parse_int(k, v)); }},
      {"channel.carrier_ghz", [](SimConfig& c, auto& k, auto& v) { c.carrier_ghz = parse_double(k, v); }},
      {"channel.bandwidth_mhz", [](SimConfig& c, auto& k, auto& v) { c.bandwidth_mhz = parse_double(k, v); }},
      {"mobility.mode",
       [](SimConfig& c, auto& k, auto& v) {
         const auto t = boost::algorithm::trim_copy(v);
         if (t == "linear") c.mobility_mode = MobilityMode::linear;
         else if (t == "random_waypoint") c.mobility_mode = MobilityMode::random_waypoint;
         else throw ConfigError(k, "expected linear or random_waypoint");
       }},
      {"mobility.v_min_mps", [](SimConfig& c, auto& k, auto& v) { c.v_min_mps = parse_double(k, v); }},
      {"mobility.v_max_mps", [](SimConfig& c, auto& k, auto& v) { c.v_max_mps = parse_double(k, v); }},
      {"mobility.velocity_mps",
       [](SimConfig& c, auto& k, auto& v) {
         const auto t = boost::algorithm::trim_copy(v);
         if (t == "none" || t.empty()) c.fixed_velocity_mps.reset();
         else c.fixed_velocity_mps = parse_double(k, t);
       }},
      {"mobility.path_from_gnb",
       [](SimConfig& c, auto& k, auto& v) { c.path_from_gnb = static_cast<int>(parse_int(k, v)); }},
      {"mobility.path_to_gnb",
       [](SimConfig& c, auto& k, auto& v) { c.path_to_gnb = static_cast<int>(parse_int(k, v)); }},
      {"cho.o_prep_db", [](SimConfig& c, auto& k, auto& v) { c.cho.o_prep_db = parse_double(k, v); }},
      {"cho.o_exec_db", [](SimConfig& c, auto& k, auto& v) { c.cho.o_exec_db = parse_double(k, v); }},
      {"cho.t_prep_ms", [](SimConfig& c, auto& k, auto& v) { c.cho.t_prep_ms = parse_int(k, v); }},
      {"cho.t_exec_ms", [](SimConfig& c, auto& k, auto& v) { c.cho.t_exec_ms = parse_int(k, v); }},
      {"cho.t_sample_ms", [](SimConfig& c, auto& k, auto& v) { c.cho.t_sample_ms = parse_int(k, v); }},
      {"cho.reselect_target_in_wait",
       [](SimConfig& c, auto& k, auto& v) { c.reselect_target_in_wait = parse_bool(k, v); }},
      {"rlf.gamma_out_db", [](SimConfig& c, auto& k, auto& v) { c.rlf.gamma_out_db = parse_double(k, v); }},
      {"rlf.gamma_in_db", [](SimConfig& c, auto& k, auto& v) { c.rlf.gamma_in_db = parse_double(k, v); }},
      {"rlf.n310", [](SimConfig& c, auto& k, auto& v) { c.rlf.n310 = static_cast<int>(parse_int(k, v)); }},
      {"rlf.t310_ms", [](SimConfig& c, auto& k, auto& v) { c.rlf.t310_ms = parse_int(k, v); }},
      {"rlf.frame_ms", [](SimConfig& c, auto& k, auto& v) { c.rlf.frame_ms = parse_int(k, v); }},
      {"traffic.packet_rates",
       [](SimConfig& c, auto& k, auto& v) { c.packet_rates = parse_list(k, v, " \t,"); }},
  };
  return table;
}

}  // namespace

void apply_setting(SimConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(key, "unknown configuration key");
  it->second(config, key, value);
}

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(text, "override must look like section.key=value");
  return {boost::algorithm::trim_copy(text.substr(0, eq)), text.substr(eq + 1)};
}

SimConfig parse_config(const std::string& ini_text,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config", fmt::format("line {}: {}", e.line(), e.message()));
  }

  std::string base = "multicell";
  if (auto p = tree.get_optional<std::string>("scenario.preset")) base = boost::algorithm::trim_copy(*p);
  for (const auto& [key, value] : overrides)
    if (key == "scenario.preset") base = boost::algorithm::trim_copy(value);
  SimConfig config = preset_by_name(base);

  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(section, "keys must live inside a [section]");
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (full == "scenario.preset") continue;
      apply_setting(config, full, node.get_value<std::string>());
    }
  }
  for (const auto& [key, value] : overrides) {
    if (key == "scenario.preset") continue;
    apply_setting(config, key, value);
  }
  validate(config);
  return config;
}

SimConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

std::string to_ini(const SimConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };

  out += "[scenario]\n";
  line("preset", c.preset);
  line("n_ues", c.n_ues);
  line("duration_ms", c.duration_ms);
  line("warmup_ms", c.warmup_ms);
  line("seed", c.seed);
  line("aggregation", c.aggregation == MetricsAggregation::pooled ? "pooled" : "per_ue");
  line("log_links", c.log_links ? "true" : "false");

  out += "\n[gnbs]\n";
  std::string sites;
  for (std::size_t i = 0; i < c.gnbs.size(); ++i) {
    const auto& g = c.gnbs[i];
    sites += fmt::format("{}{} {} {}", i ? "; " : "", g.position.x, g.position.y, g.tx_power_dbm);
  }
  line("positions", sites);
  line("min_spacing_m", c.min_gnb_spacing_m);
  line("max_spacing_m", c.max_gnb_spacing_m);

  out += "\n[region]\n";
  line("x_min", c.region.x_min);
  line("y_min", c.region.y_min);
  line("x_max", c.region.x_max);
  line("y_max", c.region.y_max);

  out += "\n[channel]\n";
  line("fading", c.fading.name());
  line("k_factor_db", c.fading.k_factor_db);
  line("pathloss_exponent", c.pathloss_exponent);
  line("noise_dbm", c.noise_dbm);
  line("min_distance_m", c.min_distance_m);
  line("antennas", c.antennas);
  line("carrier_ghz", c.carrier_ghz);
  line("bandwidth_mhz", c.bandwidth_mhz);

  out += "\n[mobility]\n";
  line("mode", c.mobility_mode == MobilityMode::linear ? "linear" : "random_waypoint");
  line("v_min_mps", c.v_min_mps);
  line("v_max_mps", c.v_max_mps);
  line("velocity_mps", c.fixed_velocity_mps ? fmt::format("{}", *c.fixed_velocity_mps) : std::string("none"));
  line("path_from_gnb", c.path_from_gnb);
  line("path_to_gnb", c.path_to_gnb);

  out += "\n[cho]\n";
  line("o_prep_db", c.cho.o_prep_db);
  line("o_exec_db", c.cho.o_exec_db);
  line("t_prep_ms", c.cho.t_prep_ms);
  line("t_exec_ms", c.cho.t_exec_ms);
  line("t_sample_ms", c.cho.t_sample_ms);
  line("reselect_target_in_wait", c.reselect_target_in_wait ? "true" : "false");

  out += "\n[rlf]\n";
  line("gamma_out_db", c.rlf.gamma_out_db);
  line("gamma_in_db", c.rlf.gamma_in_db);
  line("n310", c.rlf.n310);
  line("t310_ms", c.rlf.t310_ms);
  line("frame_ms", c.rlf.frame_ms);

  out += "\n[traffic]\n";
  line("packet_rates", fmt::format("{}", fmt::join(c.packet_rates, ", ")));
  return out;
}

std::uint64_t fingerprint(const SimConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_ini(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cho
