#include "cho/sweep.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <iterator>
#include <ostream>

#include <fmt/format.h>
#include <omp.h>

#include "cho/engine.hpp"
#include "cho/error.hpp"

namespace cho {

namespace {

constexpr std::array<std::string_view, 6> kAxisNames{"velocity", "o_prep", "o_exec", "t_prep", "t_exec", "ttt"};

std::int64_t as_ms(SweepAxis axis, double value) {
  const double r = std::round(value);
  if (r != value || r < 0.0)
    throw ConfigError(fmt::format("sweep.{}", axis_name(axis)), "durations must be non-negative whole milliseconds");
  return static_cast<std::int64_t>(r);
}

}  // namespace

std::string_view axis_name(SweepAxis axis) { return kAxisNames.at(static_cast<std::size_t>(axis)); }

SweepAxis parse_axis(std::string_view text) {
  for (std::size_t i = 0; i < kAxisNames.size(); ++i)
    if (kAxisNames[i] == text) return static_cast<SweepAxis>(i);
  throw ConfigError("sweep.axis", fmt::format("unknown axis '{}'", text));
}

void apply_axis(SimConfig& config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::velocity:
      if (!(value > 0.0)) throw ConfigError("sweep.velocity", "must be positive");
      config.fixed_velocity_mps = value / 3.6;
      config.v_min_mps = std::min(config.v_min_mps, value / 3.6);
      config.v_max_mps = std::max(config.v_max_mps, value / 3.6);
      break;
    case SweepAxis::o_prep:
      config.cho.o_prep_db = value;
      break;
    case SweepAxis::o_exec:
      config.cho.o_exec_db = value;
      break;
    case SweepAxis::t_prep:
      config.cho.t_prep_ms = as_ms(axis, value);
      break;
    case SweepAxis::t_exec:
      config.cho.t_exec_ms = as_ms(axis, value);
      break;
    case SweepAxis::ttt:
      config.cho = a3_reduce(config.cho, config.cho.o_prep_db, as_ms(axis, value));
      break;
  }
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep.values", "at least one value is required");
  if (fading_set.empty()) throw ConfigError("sweep.fading", "at least one fading type is required");
  if (seeds < 1) throw ConfigError("sweep.seeds", "must be >= 1");
}

RunFold::RunFold(const SimConfig& config)
    : metrics(config.warmup_ms, config.cho.t_sample_ms), counts(StateSpace(config.cho)) {}

RunFold run_seeds(const SimConfig& config, int seeds, int jobs) {
  validate(config);
  std::vector<std::vector<RunFold>> per_seed(static_cast<std::size_t>(seeds));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(jobs))
  for (int s = 0; s < seeds; ++s) {
    try {
      SimConfig c = config;
      c.seed = config.seed + static_cast<std::uint64_t>(s);
      per_seed[static_cast<std::size_t>(s)] = fold_per_ue(c, RunFold(c), 1);
    } catch (...) {
#pragma omp critical(cho_seed_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  RunFold total(config);
  for (const auto& folds : per_seed)
    for (const auto& f : folds) total.merge(f);
  return total;
}

MarkovSummary summarize_chain(const TransitionCounts& counts) {
  MarkovSummary out;
  try {
    out.matrix = estimate_matrix(counts);
    out.ergodicity = check_ergodic(out.matrix->p);
    if (out.ergodicity->verdict != ChainClass::ergodic) {
      out.note = out.ergodicity->describe(&counts.space());
      if (unique_recurrent_class(out.matrix->p).empty()) return out;
    }
    out.stationary = stationary_unichain(out.matrix->p);
    out.closed_form = closed_form_pi_hof(*out.matrix);
  } catch (const DataError& e) {
    out.note = e.what();
  }
  return out;
}

MetricsRow make_row(const RunFold& fold, const SimConfig& config, int seeds, const MarkovSummary& chain) {
  MetricsRow row;
  row.fading = config.fading.name();
  row.seeds = seeds;
  row.report = make_report(fold.metrics, config.packet_rates, config.aggregation, seeds);
  if (chain.stationary) {
    row.markov_pi_hof = chain.stationary->pi(chain.matrix->space.hof());
    row.markov_p_hof = chain_hof_probability(*chain.matrix, chain.stationary->pi);
  }
  if (chain.closed_form) {
    row.closed_form_pi_hof = chain.closed_form->pi_hof;
    row.closed_form_discrepancy = chain.closed_form->discrepancy;
  }
  return row;
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  std::vector<SweepPoint> points;
  for (double v : spec.values) {
    for (const auto& f : spec.fading_set) {
      SweepPoint p;
      p.value = v;
      p.fading = f;
      p.config = spec.base;
      p.config.fading = f;
      apply_axis(p.config, spec.axis, v);
      points.push_back(std::move(p));
    }
  }

  const int runs = static_cast<int>(points.size()) * spec.seeds;
  std::vector<std::vector<RunFold>> folds(static_cast<std::size_t>(runs));
  std::exception_ptr error;
  int failed_point = -1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(jobs))
  for (int r = 0; r < runs; ++r) {
    const int point = r / spec.seeds;
    try {
      SimConfig c = points[static_cast<std::size_t>(point)].config;
      c.seed = spec.base.seed + static_cast<std::uint64_t>(r % spec.seeds);
      folds[static_cast<std::size_t>(r)] = fold_per_ue(c, RunFold(c), 1);
    } catch (...) {
#pragma omp critical(cho_sweep_error)
      if (!error || point < failed_point) {
        error = std::current_exception();
        failed_point = point;
      }
    }
  }
  if (error) {
    const SweepPoint& p = points[static_cast<std::size_t>(failed_point)];
    const std::string where = fmt::format("sweep point {}={} fading={}", axis_name(spec.axis), p.value, p.fading.name());
    try {
      std::rethrow_exception(error);
    } catch (const ConfigError& e) {
      throw ConfigError(e.field(), fmt::format("{}: {}", where, e.what()));
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", where, e.what()));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}: {}", where, e.what()));
    }
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    SweepPoint& p = points[i];
    RunFold total(p.config);
    for (int s = 0; s < spec.seeds; ++s)
      for (const auto& f : folds[i * static_cast<std::size_t>(spec.seeds) + static_cast<std::size_t>(s)]) total.merge(f);
    p.chain = summarize_chain(total.counts);
    p.row = make_row(total, p.config, spec.seeds, p.chain);
    p.row.axis = std::string(axis_name(spec.axis));
    p.row.value = fmt::format("{}", p.value);
  }
  return points;
}

std::vector<A3Row> run_a3_study(const std::vector<std::int64_t>& ttts, double hys_db, int seeds,
                                const SimConfig& base, int jobs) {
  if (ttts.empty()) throw ConfigError("a3.ttt", "at least one TTT is required");
  SweepSpec spec;
  spec.axis = SweepAxis::ttt;
  spec.values.assign(ttts.begin(), ttts.end());
  spec.fading_set = {base.fading};
  spec.seeds = seeds;
  spec.base = base;
  spec.base.cho.o_prep_db = hys_db;
  spec.base.cho = a3_reduce(spec.base.cho, hys_db, ttts.front());

  std::vector<A3Row> rows;
  for (auto& p : run_sweep(spec, jobs)) {
    A3Row row;
    row.ttt_ms = static_cast<std::int64_t>(p.value);
    row.prep_states = p.config.cho.prep_states();
    row.chain_states = StateSpace(p.config.cho).size();
    row.row = p.row;
    if (p.chain.matrix) {
      for (auto mode : {A3ChainMode::direct_handover, A3ChainMode::hof_override}) {
        try {
          const TransitionMatrix reduced = a3_chain(*p.chain.matrix, mode);
          const double pi = stationary(reduced).pi(reduced.space.hof());
          (mode == A3ChainMode::direct_handover ? row.pi_hof_direct : row.pi_hof_override) = pi;
        } catch (const DataError&) {
          // non-ergodic reduced chain: left empty
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_a3_csv(std::ostream& out, std::span<const A3Row> rows) {
  fmt::memory_buffer buf;
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  fmt::format_to(std::back_inserter(buf),
                 "ttt_ms,prep_states,chain_states,fading,seeds,p_hof,p_hof_hw,hof_events,completed_handovers,"
                 "markov_pi_hof,pi_hof_direct,pi_hof_override\n");
  for (const auto& r : rows)
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.ttt_ms, r.prep_states,
                   r.chain_states, r.row.fading, r.row.seeds, opt(r.row.report.p_hof), r.row.report.p_hof_halfwidth,
                   r.row.report.hof_events, r.row.report.successes, opt(r.row.markov_pi_hof), opt(r.pi_hof_direct),
                   opt(r.pi_hof_override));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace cho
