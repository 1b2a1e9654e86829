#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "cho/rng.hpp"

namespace cho {

using ComplexSample = std::complex<double>;
using ChannelVector = std::vector<ComplexSample>;

/// Per-component complex Gaussian parameters of a Rician channel.
/// Real and imaginary parts are each N(mu, sigma^2), so E|h_l|^2 = 2(mu^2 + sigma^2) = 1.
struct RicianParams {
  double k_factor_db;
  double k_linear;
  double mu;
  double sigma;
};

/// K given in dB; -infinity yields Rayleigh (k_linear = 0).
RicianParams rician_params(double k_factor_db);
RicianParams rician_params_linear(double k_linear);

enum class FadingKind { rayleigh, rician, none };

/// Fading model of every gNB->UE link. `none` is the deterministic unit
/// channel (|h_l|^2 = 1), i.e. the K -> infinity limit.
struct Fading {
  FadingKind kind = FadingKind::rayleigh;
  double k_factor_db = 3.0;

  static Fading rayleigh() { return {FadingKind::rayleigh, 0.0}; }
  static Fading rician(double k_db) { return {FadingKind::rician, k_db}; }
  static Fading none() { return {FadingKind::none, 0.0}; }

  RicianParams params() const;
  std::string name() const;
  bool operator==(const Fading&) const = default;
};

/// Parses "rayleigh", "rician", "rician:<k_db>" or "none".
Fading parse_fading(const std::string& text, double default_k_db = 3.0);

struct LinkBudget {
  double tx_power_watts;
  double pathloss_exponent;
  double noise_power_watts;
};

/// Draws h in C^M. Throws ConfigError when m == 0.
ChannelVector draw_channel(const RicianParams& params, std::size_t m, SeededStream& rng);

/// ||h||^2 for a fresh draw; consumes the stream exactly like draw_channel.
double draw_channel_gain(const RicianParams& params, std::size_t m, SeededStream& rng);

/// |h^H sqrt(d^-alpha)|^2 P_T. Throws std::domain_error for distance <= 0.
double received_power(std::span<const ComplexSample> h, double distance_m, const LinkBudget& budget);
double received_power_from_gain(double gain, double distance_m, const LinkBudget& budget);

/// serving / (sum(interferers) + noise).
double sinr(double serving_rx_watts, std::span<const double> interferer_rx_watts, double noise_watts);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double ratio);

}  // namespace cho
