#include "cho/metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cho/error.hpp"

namespace cho {

namespace {

constexpr double kZ95 = 1.959963984540054;

bool is_prep_entry(const TraceEvent& ev) {
  return ev.from.phase == Phase::norm && (ev.to.phase == Phase::prep || ev.to.phase == Phase::wait);
}

double binomial_halfwidth(double p, double n) { return n > 0.0 ? kZ95 * std::sqrt(p * (1.0 - p) / n) : 0.0; }

struct MeanSe {
  double mean = 0.0;
  double halfwidth = 0.0;
};

MeanSe mean_halfwidth(std::span<const double> xs) {
  MeanSe out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return out;
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.halfwidth = kZ95 * std::sqrt(ss / (n - 1.0) / n);
  return out;
}

}  // namespace

MetricsAccumulator::MetricsAccumulator(std::int64_t warmup_ms, std::int64_t t_sample_ms)
    : warmup_ms_(warmup_ms), t_sample_ms_(t_sample_ms) {
  if (t_sample_ms <= 0) throw ConfigError("cho.t_sample_ms", "must be positive");
}

void MetricsAccumulator::on_event(const TraceEvent& ev) {
  auto it = open_.find(ev.ue_id);
  if (it == open_.end()) {
    units_.emplace_back();
    it = open_.emplace(ev.ue_id, Open{units_.size() - 1, std::nullopt}).first;
  }
  Open& open = it->second;
  UeTally& tally = units_[open.unit];
  const bool counted = ev.time_ms > warmup_ms_;

  if (counted) {
    ++tally.observed_samples;
    if (ev.from.phase == Phase::hof) ++tally.hof_samples;
  }
  if (is_prep_entry(ev)) {
    if (counted) ++tally.prep_entries;
    if (!open.episode_start_ms) open.episode_start_ms = ev.time_ms;
  }
  switch (ev.cause) {
    case Cause::exec_complete:
      if (counted) {
        ++tally.successes;
        if (open.episode_start_ms)
          tally.latencies_ms.push_back(static_cast<double>(ev.time_ms - *open.episode_start_ms));
      }
      open.episode_start_ms.reset();
      break;
    case Cause::rlf_hof:
      if (counted) ++tally.hof_events;
      open.episode_start_ms.reset();
      break;
    case Cause::rlf_norm:
      if (counted) ++tally.rlf_norm_events;
      open.episode_start_ms.reset();
      break;
    default:
      break;
  }
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
  units_.insert(units_.end(), other.units_.begin(), other.units_.end());
  // Units taken from `other` are closed; events for their UEs start new units.
  open_.clear();
}

UeTally MetricsAccumulator::pooled() const {
  UeTally sum;
  for (const auto& u : units_) {
    sum.observed_samples += u.observed_samples;
    sum.prep_entries += u.prep_entries;
    sum.successes += u.successes;
    sum.hof_events += u.hof_events;
    sum.rlf_norm_events += u.rlf_norm_events;
    sum.hof_samples += u.hof_samples;
    sum.latencies_ms.insert(sum.latencies_ms.end(), u.latencies_ms.begin(), u.latencies_ms.end());
  }
  return sum;
}

MetricsReport make_report(const MetricsAccumulator& acc, std::span<const double> packet_rates,
                          MetricsAggregation aggregation, int run_count) {
  const UeTally total = acc.pooled();
  const double sample_s = static_cast<double>(acc.t_sample_ms()) / 1000.0;

  MetricsReport r;
  r.run_count = run_count;
  r.observed_samples = total.observed_samples;
  r.prep_entries = total.prep_entries;
  r.successes = total.successes;
  r.hof_events = total.hof_events;
  r.rlf_events = total.rlf_events();
  r.observed_s = static_cast<double>(total.observed_samples) * sample_s;
  r.hof_occupancy = total.observed_samples
                        ? static_cast<double>(total.hof_samples) / static_cast<double>(total.observed_samples)
                        : 0.0;
  r.latency_samples_ms = total.latencies_ms;

  if (aggregation == MetricsAggregation::pooled) {
    if (r.observed_s > 0.0) {
      r.hi_rate_per_s = hi_rate(total.prep_entries, r.observed_s);
      r.hi_rate_halfwidth = kZ95 * std::sqrt(static_cast<double>(total.prep_entries)) / r.observed_s;
    }
    r.p_hof = hof_probability(total.hof_events, total.successes);
    if (r.p_hof) r.p_hof_halfwidth = binomial_halfwidth(*r.p_hof, static_cast<double>(total.hof_events + total.successes));
    r.p_rlf = rlf_probability(total.rlf_events(), total.successes);
    if (r.p_rlf)
      r.p_rlf_halfwidth = binomial_halfwidth(*r.p_rlf, static_cast<double>(total.rlf_events() + total.successes));
    if (!total.latencies_ms.empty()) {
      const MeanSe l = mean_halfwidth(total.latencies_ms);
      r.mean_latency_ms = l.mean;
      r.latency_halfwidth_ms = l.halfwidth;
    }
  } else {
    std::vector<double> hi, hof, rlf, lat;
    for (const auto& u : acc.units()) {
      if (u.observed_samples)
        hi.push_back(hi_rate(u.prep_entries, static_cast<double>(u.observed_samples) * sample_s));
      if (auto p = hof_probability(u.hof_events, u.successes)) hof.push_back(*p);
      if (auto p = rlf_probability(u.rlf_events(), u.successes)) rlf.push_back(*p);
      if (!u.latencies_ms.empty()) lat.push_back(mean_halfwidth(u.latencies_ms).mean);
    }
    const MeanSe h = mean_halfwidth(hi);
    r.hi_rate_per_s = h.mean;
    r.hi_rate_halfwidth = h.halfwidth;
    if (!hof.empty()) {
      const MeanSe m = mean_halfwidth(hof);
      r.p_hof = m.mean;
      r.p_hof_halfwidth = m.halfwidth;
    }
    if (!rlf.empty()) {
      const MeanSe m = mean_halfwidth(rlf);
      r.p_rlf = m.mean;
      r.p_rlf_halfwidth = m.halfwidth;
    }
    if (!lat.empty()) {
      const MeanSe m = mean_halfwidth(lat);
      r.mean_latency_ms = m.mean;
      r.latency_halfwidth_ms = m.halfwidth;
    }
  }

  for (double rate : packet_rates) {
    PacketLoss pl;
    pl.packets_per_s = rate;
    if (r.mean_latency_ms) {
      pl.loss = packet_loss(*r.mean_latency_ms / 1000.0, rate);
      pl.halfwidth = packet_loss(r.latency_halfwidth_ms / 1000.0, rate);
    }
    r.packet_loss.push_back(pl);
  }
  return r;
}

double hi_rate(std::uint64_t prep_entries, double observed_s) {
  if (!(observed_s > 0.0)) throw DataError("hi_rate: observed duration must be positive");
  return static_cast<double>(prep_entries) / observed_s;
}

double hi_rate(std::span<const TraceEvent> events, double observed_s) {
  std::uint64_t n = 0;
  for (const auto& ev : events) n += is_prep_entry(ev) ? 1 : 0;
  return hi_rate(n, observed_s);
}

std::optional<double> hof_probability(std::uint64_t hof_events, std::uint64_t successes) {
  const std::uint64_t attempts = hof_events + successes;
  if (attempts == 0) return std::nullopt;
  return static_cast<double>(hof_events) / static_cast<double>(attempts);
}

std::optional<double> hof_probability(std::span<const TraceEvent> events) {
  std::uint64_t hof = 0, ok = 0;
  for (const auto& ev : events) {
    hof += ev.cause == Cause::rlf_hof ? 1 : 0;
    ok += ev.cause == Cause::exec_complete ? 1 : 0;
  }
  return hof_probability(hof, ok);
}

std::optional<double> rlf_probability(std::uint64_t rlf_events, std::uint64_t successes) {
  return hof_probability(rlf_events, successes);
}

std::optional<double> rlf_probability(std::span<const TraceEvent> events) {
  std::uint64_t rlf = 0, ok = 0;
  for (const auto& ev : events) {
    rlf += (ev.cause == Cause::rlf_hof || ev.cause == Cause::rlf_norm) ? 1 : 0;
    ok += ev.cause == Cause::exec_complete ? 1 : 0;
  }
  return rlf_probability(rlf, ok);
}

std::vector<double> latency(std::span<const TraceEvent> events) {
  std::unordered_map<int, std::int64_t> start;
  std::vector<double> out;
  for (const auto& ev : events) {
    if (is_prep_entry(ev)) start.try_emplace(ev.ue_id, ev.time_ms);
    if (ev.cause == Cause::exec_complete) {
      if (auto it = start.find(ev.ue_id); it != start.end()) out.push_back(static_cast<double>(ev.time_ms - it->second));
      start.erase(ev.ue_id);
    } else if (ev.cause == Cause::rlf_hof || ev.cause == Cause::rlf_norm) {
      start.erase(ev.ue_id);
    }
  }
  return out;
}

double packet_loss(double mean_latency_s, double packets_per_s) {
  if (mean_latency_s < 0.0 || packets_per_s < 0.0)
    throw std::invalid_argument("packet_loss: latency and packet rate must be non-negative");
  return packets_per_s * mean_latency_s;
}

std::optional<double> chain_hof_probability(const TransitionMatrix& m, const Eigen::VectorXd& pi) {
  const StateSpace& s = m.space;
  const int hof = s.hof();
  double into_hof = 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (i != hof) into_hof += pi(i) * m.p(i, hof);
  const int last = s.exec_states() > 0 ? s.ordinal(ChoState::exec(s.exec_states())) : s.wait();
  const double success = pi(last) * m.p(last, s.norm());
  if (into_hof + success <= 0.0) return std::nullopt;
  return into_hof / (into_hof + success);
}

}  // namespace cho
