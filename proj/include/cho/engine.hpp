#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <vector>

#include <omp.h>

#include "cho/channel.hpp"
#include "cho/config.hpp"
#include "cho/fsm.hpp"
#include "cho/mobility.hpp"
#include "cho/rng.hpp"

namespace cho {

/// Per-sample RSRP of every gNB plus the serving SINR, recorded when
/// `SimConfig::log_links` is set.
struct LinkRecord {
  std::int64_t time_ms = 0;
  int ue_id = 0;
  std::vector<double> rsrp_dbm;
  double sinr_db = 0.0;
};

struct RunTrace {
  std::uint64_t fingerprint = 0;
  StateSpace space{0, 1};
  std::int64_t t_sample_ms = 20;
  std::int64_t duration_ms = 0;
  int n_ues = 0;
  std::vector<TraceEvent> events;  // ordered by (time_ms, ue_id)
  std::vector<LinkRecord> links;
};

struct UeContext {
  int ue_id = 0;
  MobilityState mobility;
  int serving_gnb = 0;
  std::optional<int> pinned_target;
  ChoState state = ChoState::norm();
  RlfMonitor rlf;
};

/// One UE's full per-sample pipeline: mobility, fading draws on every link,
/// RSRP/SINR, RLF monitor and CHO state machine. Streams are seeded from
/// (master seed, ue id[, gnb id]) so UEs are independent of each other.
class UeSimulator {
 public:
  UeSimulator(const SimConfig& config, int ue_id);

  /// Evaluates sample `tick` (time (tick + 1) * t_sample_ms).
  TraceEvent advance(std::int64_t tick, LinkRecord* link_log = nullptr);

  const UeContext& context() const noexcept { return ctx_; }

 private:
  int nearest_gnb() const;

  SimConfig config_;
  StateSpace space_;
  MobilityModel model_;
  RicianParams fading_;
  std::vector<LinkBudget> budgets_;
  double noise_watts_;
  SeededStream mobility_rng_;
  std::vector<SeededStream> link_rngs_;
  std::vector<double> rx_;
  UeContext ctx_;
};

/// Reference implementation: tick-major loop over all UEs, single thread.
RunTrace run_serial(const SimConfig& config);

/// UE-major OpenMP kernel; output is identical to run_serial.
RunTrace run_parallel(const SimConfig& config, int threads = 0);

inline RunTrace run(const SimConfig& config) { return run_parallel(config); }

inline int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

/// Streams every UE's events through its own copy of `init` without storing
/// the trace. `Fold` needs `void on_event(const TraceEvent&)`. Results are
/// indexed by ue id.
template <typename Fold>
std::vector<Fold> fold_per_ue(const SimConfig& config, const Fold& init, int threads = 0) {
  validate(config);
  const int n = config.n_ues;
  const std::int64_t ticks = config.ticks();
  std::vector<Fold> folds(static_cast<std::size_t>(n), init);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
  for (int u = 0; u < n; ++u) {
    try {
      UeSimulator sim(config, u);
      for (std::int64_t t = 0; t < ticks; ++t) folds[static_cast<std::size_t>(u)].on_event(sim.advance(t));
    } catch (...) {
#pragma omp critical(cho_fold_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return folds;
}

}  // namespace cho
