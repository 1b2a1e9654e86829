#include "cho/fsm.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fmt/format.h>

#include "cho/error.hpp"

namespace cho {

namespace {

int ceil_div(std::int64_t num, std::int64_t den) { return static_cast<int>((num + den - 1) / den); }

}  // namespace

int MobilityParams::prep_states() const { return ceil_div(t_prep_ms, t_sample_ms); }
int MobilityParams::exec_states() const { return ceil_div(t_exec_ms, t_sample_ms); }

void MobilityParams::validate() const {
  if (t_sample_ms <= 0) throw ConfigError("cho.t_sample_ms", "must be > 0");
  if (t_prep_ms < 0) throw ConfigError("cho.t_prep_ms", "must be >= 0");
  if (t_exec_ms < 0) throw ConfigError("cho.t_exec_ms", "must be >= 0");
  if (!std::isfinite(o_prep_db)) throw ConfigError("cho.o_prep_db", "must be finite");
  if (!std::isfinite(o_exec_db)) throw ConfigError("cho.o_exec_db", "must be finite");
  if (prep_states() == 0 && exec_states() == 0)
    throw ConfigError("cho.t_prep_ms", "t_prep_ms and t_exec_ms cannot both be zero");
}

StateSpace::StateSpace(int prep_states, int exec_states) : n_(prep_states), m_(exec_states) {
  if (n_ < 0 || m_ < 0) throw InvariantViolation("StateSpace: negative state count");
}

bool StateSpace::contains(ChoState s) const noexcept {
  switch (s.phase) {
    case Phase::norm:
    case Phase::wait:
    case Phase::hof:
      return s.index == 0;
    case Phase::prep:
      return s.index >= 1 && s.index <= n_;
    case Phase::exec:
      return s.index >= 1 && s.index <= m_;
  }
  return false;
}

int StateSpace::ordinal(ChoState s) const {
  if (!contains(s)) throw InvariantViolation(fmt::format("state outside chain (n={}, m={})", n_, m_));
  switch (s.phase) {
    case Phase::norm:
      return 0;
    case Phase::prep:
      return s.index;
    case Phase::wait:
      return n_ + 1;
    case Phase::exec:
      return n_ + 1 + s.index;
    case Phase::hof:
      return n_ + m_ + 2;
  }
  return -1;
}

ChoState StateSpace::state(int ordinal) const {
  if (ordinal < 0 || ordinal >= size()) throw InvariantViolation(fmt::format("state ordinal {} out of range", ordinal));
  if (ordinal == 0) return ChoState::norm();
  if (ordinal <= n_) return ChoState::prep(ordinal);
  if (ordinal == n_ + 1) return ChoState::wait();
  if (ordinal <= n_ + 1 + m_) return ChoState::exec(ordinal - n_ - 1);
  return ChoState::hof();
}

std::string StateSpace::name(ChoState s) const {
  if (!contains(s)) throw InvariantViolation("name: state outside chain");
  switch (s.phase) {
    case Phase::norm:
      return "NORM";
    case Phase::prep:
      return fmt::format("A{}", s.index);
    case Phase::wait:
      return "WAIT";
    case Phase::exec:
      return fmt::format("B{}", s.index);
    case Phase::hof:
      return "HOF";
  }
  return {};
}

std::optional<ChoState> StateSpace::parse(std::string_view text) const {
  if (text == "NORM") return ChoState::norm();
  if (text == "WAIT") return ChoState::wait();
  if (text == "HOF") return ChoState::hof();
  if (text.size() < 2 || (text[0] != 'A' && text[0] != 'B')) return std::nullopt;
  int index = 0;
  auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), index);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  ChoState s = text[0] == 'A' ? ChoState::prep(index) : ChoState::exec(index);
  if (!contains(s)) return std::nullopt;
  return s;
}

bool StateSpace::allowed(ChoState from, ChoState to) const {
  if (!contains(from) || !contains(to)) return false;
  const ChoState hof = ChoState::hof();
  switch (from.phase) {
    case Phase::norm:
      return to == ChoState::norm() || (n_ >= 1 ? to == ChoState::prep(1) : to == ChoState::wait());
    case Phase::prep:
      if (to == hof) return true;
      if (from.index < n_) return to == ChoState::prep(from.index + 1) || to == ChoState::norm();
      return to == ChoState::wait();
    case Phase::wait:
      if (to == hof || to == ChoState::wait()) return true;
      return m_ >= 1 ? to == ChoState::exec(1) : to == ChoState::norm();
    case Phase::exec:
      if (to == hof) return true;
      if (from.index < m_) return to == ChoState::exec(from.index + 1) || to == ChoState::wait();
      return to == ChoState::norm();
    case Phase::hof:
      return to == ChoState::norm();
  }
  return false;
}

namespace {

constexpr std::array<std::string_view, 10> kCauseNames = {
    "prep_cond",      "prep_violation", "prep_complete", "exec_cond", "exec_violation",
    "exec_complete",  "rlf_hof",        "hof_recover",   "hold",      "rlf_norm"};

}  // namespace

std::string_view cause_name(Cause c) { return kCauseNames.at(static_cast<std::size_t>(c)); }

std::optional<Cause> parse_cause(std::string_view text) {
  for (std::size_t i = 0; i < kCauseNames.size(); ++i)
    if (kCauseNames[i] == text) return static_cast<Cause>(i);
  return std::nullopt;
}

bool prep_condition(double p1_dbm, double p2_dbm, double o_prep_db) { return p2_dbm > p1_dbm + o_prep_db; }
bool exec_condition(double p1_dbm, double p2_dbm, double o_exec_db) { return p2_dbm > p1_dbm + o_exec_db; }

Transition fsm_step(ChoState state, bool prep_ok, bool exec_ok, bool rlf_fired, const StateSpace& space) {
  if (!space.contains(state))
    throw InvariantViolation(fmt::format("fsm_step: state (phase {}, index {}) invalid for n={}, m={}",
                                         static_cast<int>(state.phase), state.index, space.prep_states(),
                                         space.exec_states()));
  const int n = space.prep_states();
  const int m = space.exec_states();
  switch (state.phase) {
    case Phase::hof:
      return {ChoState::norm(), Cause::hof_recover};
    case Phase::norm:
      if (rlf_fired) return {ChoState::norm(), Cause::rlf_norm};
      if (n == 0) return {ChoState::wait(), Cause::prep_complete};
      return prep_ok ? Transition{ChoState::prep(1), Cause::prep_cond} : Transition{ChoState::norm(), Cause::hold};
    case Phase::prep:
      if (rlf_fired) return {ChoState::hof(), Cause::rlf_hof};
      if (state.index == n) return {ChoState::wait(), Cause::prep_complete};
      return prep_ok ? Transition{ChoState::prep(state.index + 1), Cause::prep_cond}
                     : Transition{ChoState::norm(), Cause::prep_violation};
    case Phase::wait:
      if (rlf_fired) return {ChoState::hof(), Cause::rlf_hof};
      if (m == 0) return {ChoState::norm(), Cause::exec_complete};
      return exec_ok ? Transition{ChoState::exec(1), Cause::exec_cond} : Transition{ChoState::wait(), Cause::hold};
    case Phase::exec:
      if (rlf_fired) return {ChoState::hof(), Cause::rlf_hof};
      if (state.index == m) return {ChoState::norm(), Cause::exec_complete};
      return exec_ok ? Transition{ChoState::exec(state.index + 1), Cause::exec_cond}
                     : Transition{ChoState::wait(), Cause::exec_violation};
  }
  throw InvariantViolation("fsm_step: unknown phase");
}

void RlfParams::validate() const {
  if (!(gamma_in_db > gamma_out_db)) throw ConfigError("rlf.gamma_in_db", "must exceed gamma_out_db");
  if (n310 < 1) throw ConfigError("rlf.n310", "must be >= 1");
  if (t310_ms <= 0) throw ConfigError("rlf.t310_ms", "must be > 0");
  if (frame_ms <= 0) throw ConfigError("rlf.frame_ms", "must be > 0");
}

RlfStep rlf_step(const RlfMonitor& monitor, double sinr_db, const RlfParams& params, std::int64_t dt_ms) {
  RlfStep out{monitor, false};
  RlfMonitor& mon = out.monitor;
  if (mon.timer_active()) {
    if (sinr_db > params.gamma_in_db) {
      mon = RlfMonitor{};  // in-sync: cancel T310
      return out;
    }
    *mon.t310_remaining_ms -= dt_ms;
    if (*mon.t310_remaining_ms <= 0) {
      mon = RlfMonitor{};
      out.fired = true;
    }
    return out;
  }
  mon.consecutive_bad_frames = sinr_db < params.gamma_out_db ? mon.consecutive_bad_frames + 1 : 0;
  if (mon.consecutive_bad_frames >= params.n310) {
    mon.consecutive_bad_frames = params.n310;
    mon.t310_remaining_ms = params.t310_ms;
  }
  return out;
}

MobilityParams a3_reduce(const MobilityParams& params, double hys_db, std::int64_t ttt_ms, A3Variant variant) {
  if (!(hys_db >= 0.0)) throw ConfigError("a3.hys_db", "hysteresis must be >= 0");
  if (ttt_ms <= 0) throw ConfigError("a3.ttt_ms", "time-to-trigger must be > 0");
  MobilityParams out = params;
  if (variant == A3Variant::prep_only) {
    out.o_prep_db = hys_db;
    out.t_prep_ms = ttt_ms;
    out.o_exec_db = 0.0;
    out.t_exec_ms = 0;
  } else {
    out.o_prep_db = 0.0;
    out.t_prep_ms = 0;
    out.o_exec_db = hys_db;
    out.t_exec_ms = ttt_ms;
  }
  return out;
}

}  // namespace cho
