#include "cho/channel.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "cho/error.hpp"

namespace cho {

RicianParams rician_params_linear(double k_linear) {
  RicianParams p{};
  p.k_linear = k_linear;
  p.k_factor_db = k_linear > 0.0 ? 10.0 * std::log10(k_linear)
                                 : -std::numeric_limits<double>::infinity();
  p.mu = std::sqrt(k_linear / (2.0 * (k_linear + 1.0)));
  p.sigma = std::sqrt(1.0 / (2.0 * (k_linear + 1.0)));
  return p;
}

RicianParams rician_params(double k_factor_db) {
  if (std::isinf(k_factor_db) && k_factor_db < 0) return rician_params_linear(0.0);
  RicianParams p = rician_params_linear(std::pow(10.0, k_factor_db / 10.0));
  p.k_factor_db = k_factor_db;
  return p;
}

RicianParams Fading::params() const {
  switch (kind) {
    case FadingKind::rayleigh:
      return rician_params_linear(0.0);
    case FadingKind::rician:
      return rician_params(k_factor_db);
    case FadingKind::none:
      break;
  }
  const double inf = std::numeric_limits<double>::infinity();
  return RicianParams{inf, inf, std::sqrt(0.5), 0.0};
}

std::string Fading::name() const {
  switch (kind) {
    case FadingKind::rayleigh:
      return "rayleigh";
    case FadingKind::rician:
      return k_factor_db == 3.0 ? std::string("rician") : fmt::format("rician:{}", k_factor_db);
    case FadingKind::none:
      break;
  }
  return "none";
}

Fading parse_fading(const std::string& text, double default_k_db) {
  if (text == "rayleigh") return Fading::rayleigh();
  if (text == "none") return Fading::none();
  if (text == "rician") return Fading::rician(default_k_db);
  if (text.rfind("rician:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double k = std::stod(text.substr(7), &used);
      if (used == text.size() - 7) return Fading::rician(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("channel.fading", "expected rayleigh, rician[:k_db] or none, got '" + text + "'");
}

namespace {

inline ComplexSample draw_component(const RicianParams& p, SeededStream& rng) {
  if (p.sigma == 0.0) return {p.mu, p.mu};
  const double re = rng.gaussian(p.mu, p.sigma);
  const double im = rng.gaussian(p.mu, p.sigma);
  return {re, im};
}

}  // namespace

ChannelVector draw_channel(const RicianParams& params, std::size_t m, SeededStream& rng) {
  if (m == 0) throw ConfigError("channel.antennas", "antenna count must be >= 1");
  ChannelVector h(m);
  for (auto& c : h) c = draw_component(params, rng);
  return h;
}

double draw_channel_gain(const RicianParams& params, std::size_t m, SeededStream& rng) {
  if (m == 0) throw ConfigError("channel.antennas", "antenna count must be >= 1");
  double gain = 0.0;
  for (std::size_t l = 0; l < m; ++l) gain += std::norm(draw_component(params, rng));
  return gain;
}

double received_power_from_gain(double gain, double distance_m, const LinkBudget& budget) {
  if (!(distance_m > 0.0)) throw std::domain_error("received_power: distance must be > 0");
  const double attenuation = budget.pathloss_exponent == 2.0
                                 ? 1.0 / (distance_m * distance_m)
                                 : std::pow(distance_m, -budget.pathloss_exponent);
  return gain * attenuation * budget.tx_power_watts;
}

double received_power(std::span<const ComplexSample> h, double distance_m, const LinkBudget& budget) {
  const double gain = std::accumulate(h.begin(), h.end(), 0.0,
                                      [](double acc, const ComplexSample& c) { return acc + std::norm(c); });
  return received_power_from_gain(gain, distance_m, budget);
}

double sinr(double serving_rx_watts, std::span<const double> interferer_rx_watts, double noise_watts) {
  const double interference = std::accumulate(interferer_rx_watts.begin(), interferer_rx_watts.end(), 0.0);
  return serving_rx_watts / (interference + noise_watts);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace cho
