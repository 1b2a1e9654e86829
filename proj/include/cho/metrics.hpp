#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cho/config.hpp"
#include "cho/fsm.hpp"
#include "cho/markov.hpp"

namespace cho {

/// Event counts of one UE in one run. Only samples after the warm-up enter
/// the counts; a latency is kept when its episode completes after warm-up.
struct UeTally {
  std::uint64_t observed_samples = 0;
  std::uint64_t prep_entries = 0;
  std::uint64_t successes = 0;
  std::uint64_t hof_events = 0;
  std::uint64_t rlf_norm_events = 0;
  std::uint64_t hof_samples = 0;
  std::vector<double> latencies_ms;

  std::uint64_t rlf_events() const noexcept { return hof_events + rlf_norm_events; }
};

/// Streaming fold over TraceEvents. Each (run, UE) pair becomes one unit;
/// `merge` appends units, so merging in a fixed order is deterministic.
class MetricsAccumulator {
 public:
  MetricsAccumulator(std::int64_t warmup_ms, std::int64_t t_sample_ms);

  void on_event(const TraceEvent& ev);
  void merge(const MetricsAccumulator& other);

  const std::vector<UeTally>& units() const noexcept { return units_; }
  std::int64_t t_sample_ms() const noexcept { return t_sample_ms_; }
  UeTally pooled() const;

 private:
  struct Open {
    std::size_t unit;
    std::optional<std::int64_t> episode_start_ms;
  };

  std::int64_t warmup_ms_;
  std::int64_t t_sample_ms_;
  std::vector<UeTally> units_;
  std::unordered_map<int, Open> open_;
};

struct PacketLoss {
  double packets_per_s = 0.0;
  std::optional<double> loss;  // packets lost per completed handover
  double halfwidth = 0.0;
};

/// 95% halfwidths are normal approximations: binomial for probabilities,
/// Poisson for the HI rate, sample standard error for latency. Under per-UE
/// aggregation every metric is the mean over units with its standard error.
struct MetricsReport {
  double hi_rate_per_s = 0.0;
  std::optional<double> p_rlf;
  std::optional<double> p_hof;
  std::optional<double> mean_latency_ms;
  std::vector<double> latency_samples_ms;
  std::vector<PacketLoss> packet_loss;
  int run_count = 0;

  double hi_rate_halfwidth = 0.0;
  double p_rlf_halfwidth = 0.0;
  double p_hof_halfwidth = 0.0;
  double latency_halfwidth_ms = 0.0;

  std::uint64_t observed_samples = 0;
  std::uint64_t prep_entries = 0;
  std::uint64_t successes = 0;
  std::uint64_t hof_events = 0;
  std::uint64_t rlf_events = 0;
  double observed_s = 0.0;
  double hof_occupancy = 0.0;  // fraction of observed samples spent in HOF
};

MetricsReport make_report(const MetricsAccumulator& acc, std::span<const double> packet_rates,
                          MetricsAggregation aggregation = MetricsAggregation::pooled, int run_count = 1);

/// NORM -> A1 entries (NORM -> WAIT without preparation states) per second of
/// observed time. Throws DataError when observed_s <= 0.
double hi_rate(std::span<const TraceEvent> events, double observed_s);
double hi_rate(std::uint64_t prep_entries, double observed_s);

/// HOF / (HOF + successful handovers); empty without attempts.
std::optional<double> hof_probability(std::uint64_t hof_events, std::uint64_t successes);
std::optional<double> hof_probability(std::span<const TraceEvent> events);

/// All RLF firings (during handover or not) over RLF firings plus successes.
std::optional<double> rlf_probability(std::uint64_t rlf_events, std::uint64_t successes);
std::optional<double> rlf_probability(std::span<const TraceEvent> events);

/// Per-handover latency: exec_complete time minus the first preparation entry
/// of the episode. Episodes end at exec_complete, HOF and RLF in NORM; only
/// completed ones yield a latency.
std::vector<double> latency(std::span<const TraceEvent> events);

/// Expected packets lost per handover: lambda * E[latency]. Throws
/// std::invalid_argument for negative inputs.
double packet_loss(double mean_latency_s, double packets_per_s);

/// Attempt-based HOF probability implied by a chain: the HOF entry flow over
/// HOF entries plus successful exits to NORM.
std::optional<double> chain_hof_probability(const TransitionMatrix& m, const Eigen::VectorXd& pi);

}  // namespace cho
