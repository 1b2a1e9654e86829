#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cho {

/// CHO mobility parameters. Times are integral milliseconds.
struct MobilityParams {
  double o_prep_db = 1.0;
  double o_exec_db = 6.0;
  std::int64_t t_prep_ms = 100;
  std::int64_t t_exec_ms = 80;
  std::int64_t t_sample_ms = 20;

  /// n = ceil(T_prep / T_sample)
  int prep_states() const;
  /// m = ceil(T_exec / T_sample)
  int exec_states() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Phase : std::uint8_t { norm, prep, wait, exec, hof };

/// One state of the CHO chain. `index` is 1-based for prep (A_i) and exec (B_j), 0 otherwise.
struct ChoState {
  Phase phase = Phase::norm;
  int index = 0;

  static constexpr ChoState norm() { return {Phase::norm, 0}; }
  static constexpr ChoState prep(int i) { return {Phase::prep, i}; }
  static constexpr ChoState wait() { return {Phase::wait, 0}; }
  static constexpr ChoState exec(int j) { return {Phase::exec, j}; }
  static constexpr ChoState hof() { return {Phase::hof, 0}; }

  bool operator==(const ChoState&) const = default;
};

/// The n+m+3 states NORM, A1..An, WAIT, B1..Bm, HOF with their ordinals.
class StateSpace {
 public:
  StateSpace(int prep_states, int exec_states);
  explicit StateSpace(const MobilityParams& p) : StateSpace(p.prep_states(), p.exec_states()) {}

  int prep_states() const noexcept { return n_; }
  int exec_states() const noexcept { return m_; }
  int size() const noexcept { return n_ + m_ + 3; }

  bool contains(ChoState s) const noexcept;
  /// Throws InvariantViolation for states outside this space.
  int ordinal(ChoState s) const;
  ChoState state(int ordinal) const;

  int norm() const noexcept { return 0; }
  int wait() const noexcept { return n_ + 1; }
  int hof() const noexcept { return n_ + m_ + 2; }

  std::string name(ChoState s) const;
  std::string name(int ordinal) const { return name(state(ordinal)); }
  /// Parses NORM, A<i>, WAIT, B<j>, HOF. Returns nullopt for unknown or out-of-range names.
  std::optional<ChoState> parse(std::string_view text) const;

  /// True when `from -> to` is an edge of the CHO chain topology.
  bool allowed(ChoState from, ChoState to) const;
  bool allowed(int from, int to) const { return allowed(state(from), state(to)); }

  bool operator==(const StateSpace&) const = default;

 private:
  int n_;
  int m_;
};

enum class Cause : std::uint8_t {
  prep_cond,
  prep_violation,
  prep_complete,
  exec_cond,
  exec_violation,
  exec_complete,
  rlf_hof,
  hof_recover,
  hold,
  rlf_norm,  // RLF outside a handover; the UE re-attaches but no HOF is recorded
};

std::string_view cause_name(Cause c);
std::optional<Cause> parse_cause(std::string_view text);

/// Preparation condition P2 > P1 + O_prep (strict).
bool prep_condition(double p1_dbm, double p2_dbm, double o_prep_db);
/// Execution condition P2 > P1 + O_exec (strict).
bool exec_condition(double p1_dbm, double p2_dbm, double o_exec_db);

struct Transition {
  ChoState next;
  Cause cause;
};

/// One sample of the CHO state machine.
Transition fsm_step(ChoState state, bool prep_ok, bool exec_ok, bool rlf_fired, const StateSpace& space);
inline Transition fsm_step(ChoState state, bool prep_ok, bool exec_ok, bool rlf_fired, const MobilityParams& params) {
  return fsm_step(state, prep_ok, exec_ok, rlf_fired, StateSpace(params));
}

struct RlfParams {
  double gamma_out_db = -8.0;
  double gamma_in_db = -6.0;
  int n310 = 1;
  std::int64_t t310_ms = 1000;
  std::int64_t frame_ms = 20;

  void validate() const;
};

struct RlfMonitor {
  int consecutive_bad_frames = 0;
  std::optional<std::int64_t> t310_remaining_ms;

  bool timer_active() const noexcept { return t310_remaining_ms.has_value(); }
};

struct RlfStep {
  RlfMonitor monitor;
  bool fired = false;
};

/// Advances the radio-link monitor by one frame.
RlfStep rlf_step(const RlfMonitor& monitor, double sinr_db, const RlfParams& params, std::int64_t dt_ms);

enum class A3Variant {
  prep_only,  // O_prep = Hys, T_prep = TTT, no execution states
  exec_only,  // O_exec = Hys, T_exec = TTT, no preparation states
};

/// Maps an A3 (Hys, TTT) configuration onto CHO parameters.
MobilityParams a3_reduce(const MobilityParams& params, double hys_db, std::int64_t ttt_ms,
                         A3Variant variant = A3Variant::prep_only);

struct TraceEvent {
  std::int64_t time_ms = 0;
  int ue_id = 0;
  ChoState from;
  ChoState to;
  Cause cause = Cause::hold;
  int serving_gnb = 0;
  int target_gnb = -1;
  double p1_dbm = 0.0;
  double p2_dbm = 0.0;
  double sinr_db = 0.0;
};

}  // namespace cho
