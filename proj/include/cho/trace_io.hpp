#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cho/engine.hpp"
#include "cho/markov.hpp"
#include "cho/metrics.hpp"

namespace cho {

// All numbers are written in shortest round-trip form, so every file reads
// back to the exact values it was written from.

inline constexpr std::string_view kTraceMagic = "# cho-trace v1";
inline constexpr std::string_view kTraceHeader =
    "time_ms,ue_id,from_state,to_state,cause,serving_gnb,target_gnb,p1_dbm,p2_dbm,sinr_db";

void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct LoadedTrace {
  StateSpace space{0, 1};
  std::int64_t t_sample_ms = 20;
  std::optional<std::uint64_t> fingerprint;
  std::vector<TraceEvent> events;
};

/// Throws DataError on schema mismatch, unknown states or causes, off-grid
/// timestamps, gaps in a UE's sample sequence, or a UE whose `from_state`
/// differs from its previous `to_state`.
LoadedTrace read_trace_csv(std::istream& in);

/// Header `from,NORM,A1,...,HOF`; one row per source state.
void write_matrix_csv(std::ostream& out, const StateSpace& space, const Eigen::MatrixXd& p);
void write_counts_csv(std::ostream& out, const TransitionMatrix& m);
/// Reads a probability matrix; the state space is recovered from the header.
/// Counts are left empty.
TransitionMatrix read_matrix_csv(std::istream& in);

/// True when the stream starts like a trace file. Does not consume input.
bool looks_like_trace(std::istream& in);

void write_stationary_csv(std::ostream& out, const StateSpace& space, const StationaryDistribution& s);
void write_closed_form_csv(std::ostream& out, const ClosedFormResult& cf, const ErgodicityReport& ergodicity,
                           const StationaryDistribution& s, const std::vector<int>& unobserved_rows,
                           const StateSpace& space);

void write_links_csv(std::ostream& out, const RunTrace& trace);

/// One output row of a run or sweep point.
struct MetricsRow {
  std::string axis = "none";
  std::string value;
  std::string fading;
  int seeds = 1;
  MetricsReport report;
  std::optional<double> markov_pi_hof;
  std::optional<double> markov_p_hof;
  std::optional<double> closed_form_pi_hof;
  std::optional<double> closed_form_discrepancy;
};

/// Loss columns follow the packet rates of the first row.
void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

void write_latencies_csv(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace cho
