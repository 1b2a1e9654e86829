#include "cho/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cho {

UeSimulator::UeSimulator(const SimConfig& config, int ue_id)
    : config_(config),
      space_(config.cho),
      model_(config.mobility_model()),
      fading_(config.fading.params()),
      noise_watts_(dbm_to_watts(config.noise_dbm)),
      mobility_rng_(config.seed, {kMobilityStream, static_cast<std::uint64_t>(ue_id)}) {
  budgets_.reserve(config.gnbs.size());
  link_rngs_.reserve(config.gnbs.size());
  for (const auto& g : config.gnbs) {
    budgets_.push_back({dbm_to_watts(g.tx_power_dbm), config.pathloss_exponent, noise_watts_});
    link_rngs_.emplace_back(config.seed, std::initializer_list<std::uint64_t>{
                                             kLinkStream, static_cast<std::uint64_t>(ue_id),
                                             static_cast<std::uint64_t>(g.id)});
  }
  rx_.assign(config.gnbs.size(), 0.0);
  ctx_.ue_id = ue_id;
  ctx_.mobility = initial_mobility(model_, mobility_rng_);
  ctx_.serving_gnb = nearest_gnb();
}

int UeSimulator::nearest_gnb() const {
  // Strongest mean received power; equals the geometrically nearest site for equal tx power.
  int best = 0;
  double best_power = -1.0;
  for (std::size_t g = 0; g < config_.gnbs.size(); ++g) {
    const double d = std::max(distance(ctx_.mobility.position, config_.gnbs[g].position), config_.min_distance_m);
    const double p = received_power_from_gain(1.0, d, budgets_[g]);
    if (p > best_power) {
      best_power = p;
      best = static_cast<int>(g);
    }
  }
  return best;
}

TraceEvent UeSimulator::advance(std::int64_t tick, LinkRecord* link_log) {
  const std::int64_t dt_ms = config_.cho.t_sample_ms;
  const double dt_s = static_cast<double>(dt_ms) / 1000.0;
  const std::size_t antennas = static_cast<std::size_t>(config_.antennas);

  ctx_.mobility = step(ctx_.mobility, dt_s, model_, mobility_rng_);

  double total = 0.0;
  for (std::size_t g = 0; g < rx_.size(); ++g) {
    const double d = std::max(distance(ctx_.mobility.position, config_.gnbs[g].position), config_.min_distance_m);
    rx_[g] = received_power_from_gain(draw_channel_gain(fading_, antennas, link_rngs_[g]), d, budgets_[g]);
    total += rx_[g];
  }

  const int serving = ctx_.serving_gnb;
  int candidate = -1;
  for (std::size_t g = 0; g < rx_.size(); ++g) {
    if (static_cast<int>(g) == serving) continue;
    if (candidate < 0 || rx_[g] > rx_[static_cast<std::size_t>(candidate)]) candidate = static_cast<int>(g);
  }
  const bool pinned_phase = ctx_.state.phase == Phase::wait || ctx_.state.phase == Phase::exec ||
                            (ctx_.state.phase == Phase::prep && ctx_.state.index == space_.prep_states());
  if (ctx_.state.phase == Phase::wait && config_.reselect_target_in_wait) ctx_.pinned_target = candidate;
  const int target = (pinned_phase && ctx_.pinned_target) ? *ctx_.pinned_target : candidate;

  const double p_serving = rx_[static_cast<std::size_t>(serving)];
  const double p_target = rx_[static_cast<std::size_t>(target)];
  const double p1_dbm = watts_to_dbm(p_serving);
  const double p2_dbm = watts_to_dbm(p_target);
  const double sinr_db = linear_to_db(p_serving / (total - p_serving + noise_watts_));

  bool rlf_fired = false;
  if (ctx_.state.phase != Phase::hof) {
    const RlfStep r = rlf_step(ctx_.rlf, sinr_db, config_.rlf, dt_ms);
    ctx_.rlf = r.monitor;
    rlf_fired = r.fired;
  }

  const bool prep_ok = prep_condition(p1_dbm, p2_dbm, config_.cho.o_prep_db);
  const bool exec_ok = exec_condition(p1_dbm, p2_dbm, config_.cho.o_exec_db);
  const Transition tr = fsm_step(ctx_.state, prep_ok, exec_ok, rlf_fired, space_);

  TraceEvent ev;
  ev.time_ms = (tick + 1) * dt_ms;
  ev.ue_id = ctx_.ue_id;
  ev.from = ctx_.state;
  ev.to = tr.next;
  ev.cause = tr.cause;
  ev.serving_gnb = serving;
  ev.target_gnb = target;
  ev.p1_dbm = p1_dbm;
  ev.p2_dbm = p2_dbm;
  ev.sinr_db = sinr_db;

  if (link_log) {
    link_log->time_ms = ev.time_ms;
    link_log->ue_id = ctx_.ue_id;
    link_log->rsrp_dbm.resize(rx_.size());
    std::transform(rx_.begin(), rx_.end(), link_log->rsrp_dbm.begin(), watts_to_dbm);
    link_log->sinr_db = sinr_db;
  }

  switch (tr.cause) {
    case Cause::exec_complete:
      ctx_.serving_gnb = target;
      ctx_.pinned_target.reset();
      ctx_.rlf = RlfMonitor{};
      break;
    case Cause::rlf_hof:
    case Cause::prep_violation:
      ctx_.pinned_target.reset();
      break;
    case Cause::hof_recover:
      ctx_.serving_gnb = nearest_gnb();
      ctx_.rlf = RlfMonitor{};
      break;
    case Cause::rlf_norm:
      ctx_.serving_gnb = static_cast<int>(std::max_element(rx_.begin(), rx_.end()) - rx_.begin());
      ctx_.rlf = RlfMonitor{};
      break;
    default:
      break;
  }
  const bool enters_last_prep = tr.next.phase == Phase::prep && tr.next.index == space_.prep_states() &&
                                ctx_.state != tr.next;
  const bool skips_prep = space_.prep_states() == 0 && ctx_.state.phase == Phase::norm && tr.next.phase == Phase::wait;
  if (enters_last_prep || skips_prep) ctx_.pinned_target = target;

  ctx_.state = tr.next;
  return ev;
}

namespace {

RunTrace empty_trace(const SimConfig& config) {
  RunTrace trace;
  trace.fingerprint = fingerprint(config);
  trace.space = StateSpace(config.cho);
  trace.t_sample_ms = config.cho.t_sample_ms;
  trace.duration_ms = config.duration_ms;
  trace.n_ues = config.n_ues;
  return trace;
}

}  // namespace

RunTrace run_serial(const SimConfig& config) {
  validate(config);
  RunTrace trace = empty_trace(config);
  std::vector<UeSimulator> ues;
  ues.reserve(static_cast<std::size_t>(config.n_ues));
  for (int u = 0; u < config.n_ues; ++u) ues.emplace_back(config, u);

  const std::int64_t ticks = config.ticks();
  trace.events.reserve(static_cast<std::size_t>(ticks * config.n_ues));
  LinkRecord record;
  for (std::int64_t t = 0; t < ticks; ++t) {
    for (auto& ue : ues) {
      trace.events.push_back(ue.advance(t, config.log_links ? &record : nullptr));
      if (config.log_links) trace.links.push_back(record);
    }
  }
  return trace;
}

RunTrace run_parallel(const SimConfig& config, int threads) {
  validate(config);
  RunTrace trace = empty_trace(config);
  const int n = config.n_ues;
  const std::int64_t ticks = config.ticks();
  std::vector<std::vector<TraceEvent>> per_ue(static_cast<std::size_t>(n));
  std::vector<std::vector<LinkRecord>> per_ue_links(static_cast<std::size_t>(n));
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
  for (int u = 0; u < n; ++u) {
    try {
      UeSimulator sim(config, u);
      auto& events = per_ue[static_cast<std::size_t>(u)];
      auto& links = per_ue_links[static_cast<std::size_t>(u)];
      events.reserve(static_cast<std::size_t>(ticks));
      LinkRecord record;
      for (std::int64_t t = 0; t < ticks; ++t) {
        events.push_back(sim.advance(t, config.log_links ? &record : nullptr));
        if (config.log_links) links.push_back(record);
      }
    } catch (...) {
#pragma omp critical(cho_run_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  // Every UE emits exactly one event per tick, so the (time, ue) merge is an interleave.
  trace.events.reserve(static_cast<std::size_t>(ticks * n));
  for (std::int64_t t = 0; t < ticks; ++t) {
    for (int u = 0; u < n; ++u) {
      trace.events.push_back(per_ue[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)]);
      if (config.log_links) trace.links.push_back(per_ue_links[static_cast<std::size_t>(u)][static_cast<std::size_t>(t)]);
    }
  }
  return trace;
}

}  // namespace cho
