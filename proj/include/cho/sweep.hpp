#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cho/config.hpp"
#include "cho/markov.hpp"
#include "cho/metrics.hpp"
#include "cho/trace_io.hpp"

namespace cho {

enum class SweepAxis { velocity, o_prep, o_exec, t_prep, t_exec, ttt };

std::string_view axis_name(SweepAxis axis);
/// Throws ConfigError("sweep.axis") for unknown names.
SweepAxis parse_axis(std::string_view text);

/// velocity is in km/h and fixes every UE's speed; ttt re-applies the A3
/// reduction with the current O_prep as hysteresis.
void apply_axis(SimConfig& config, SweepAxis axis, double value);

struct SweepSpec {
  SweepAxis axis = SweepAxis::velocity;
  std::vector<double> values;
  std::vector<Fading> fading_set{Fading::rayleigh(), Fading::rician(3.0)};
  int seeds = 1;  // run s uses base.seed + s
  SimConfig base;

  /// Throws ConfigError for empty values, empty fading set or seeds < 1.
  void validate() const;
};

/// Streaming fold collecting everything a sweep point reports.
struct RunFold {
  MetricsAccumulator metrics;
  TransitionCounts counts;

  explicit RunFold(const SimConfig& config);
  void on_event(const TraceEvent& ev) {
    metrics.on_event(ev);
    counts.on_event(ev);
  }
  void merge(const RunFold& other) {
    metrics.merge(other.metrics);
    counts.merge(other.counts);
  }
};

/// Runs one configuration for `seeds` consecutive seeds and merges the folds
/// in (seed, ue) order. `jobs` bounds the threads over seeds.
RunFold run_seeds(const SimConfig& config, int seeds, int jobs = 0);

struct MarkovSummary {
  std::optional<TransitionMatrix> matrix;
  std::optional<StationaryDistribution> stationary;
  std::optional<ErgodicityReport> ergodicity;
  std::optional<ClosedFormResult> closed_form;
  std::string note;  // why a field is missing
};

/// Estimates, checks and solves the chain; never throws for non-ergodic or
/// empty counts, the reason lands in `note` instead. A chain with transient
/// states but one aperiodic recurrent class is still solved.
MarkovSummary summarize_chain(const TransitionCounts& counts);

MetricsRow make_row(const RunFold& fold, const SimConfig& config, int seeds, const MarkovSummary& chain);

struct SweepPoint {
  double value = 0.0;
  Fading fading;
  SimConfig config;
  MetricsRow row;
  MarkovSummary chain;
};

/// Points are ordered (value, fading) as given in the spec. A failing run
/// aborts the sweep with the offending point in the message.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int jobs = 0);

struct A3Row {
  std::int64_t ttt_ms = 0;
  int prep_states = 0;
  int chain_states = 0;
  MetricsRow row;
  std::optional<double> pi_hof_direct;    // reduced chain, WAIT -> NORM
  std::optional<double> pi_hof_override;  // reduced chain, WAIT -> HOF
};

std::vector<A3Row> run_a3_study(const std::vector<std::int64_t>& ttts, double hys_db, int seeds,
                                const SimConfig& base, int jobs = 0);

void write_a3_csv(std::ostream& out, std::span<const A3Row> rows);

}  // namespace cho
