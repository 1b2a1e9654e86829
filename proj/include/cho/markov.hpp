#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cho/error.hpp"
#include "cho/fsm.hpp"

namespace cho {

/// Raw consecutive-sample transition counts over the CHO chain.
/// Usable as a streaming fold (`on_event`) over simulator output.
class TransitionCounts {
 public:
  explicit TransitionCounts(StateSpace space);

  void add(int from, int to, std::uint64_t k = 1);
  void on_event(const TraceEvent& ev) { add(space_.ordinal(ev.from), space_.ordinal(ev.to)); }
  void merge(const TransitionCounts& other);

  std::uint64_t at(int from, int to) const { return counts_[index(from, to)]; }
  std::uint64_t row_total(int from) const;
  std::uint64_t total() const;
  /// Fraction of samples spent in each state (by the state a sample starts in).
  std::vector<double> occupancy() const;

  const StateSpace& space() const noexcept { return space_; }

 private:
  std::size_t index(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(space_.size()) + static_cast<std::size_t>(to);
  }

  StateSpace space_;
  std::vector<std::uint64_t> counts_;
};

/// Row-normalized transition estimate. Rows without observations are imputed
/// as self-loops and listed in `unobserved_rows`.
struct TransitionMatrix {
  StateSpace space{0, 1};
  Eigen::MatrixXd p;
  std::vector<std::uint64_t> counts;  // row-major, size() x size()
  std::vector<int> unobserved_rows;

  std::uint64_t count(int from, int to) const {
    return counts[static_cast<std::size_t>(from) * static_cast<std::size_t>(space.size()) + static_cast<std::size_t>(to)];
  }
};

/// Throws DataError when there are no observations or a count sits on a
/// transition the chain topology forbids.
TransitionMatrix estimate_matrix(const TransitionCounts& counts);
TransitionMatrix estimate_matrix(std::span<const TraceEvent> events, const StateSpace& space);

enum class ChainClass { ergodic, reducible, periodic };

struct ErgodicityReport {
  ChainClass verdict = ChainClass::ergodic;
  int witness_state = -1;  // reducible: a state not mutually reachable with state 0
  int period = 1;
  /// Smallest k such that every state has positive k- and (k+1)-step return
  /// probability, when one exists within the search bound.
  std::optional<int> lemma_k;

  std::string describe(const StateSpace* names = nullptr) const;
};

/// Irreducibility from strong connectivity of the positive-entry digraph,
/// aperiodicity from the gcd of return lengths. Throws DataError when `p` is
/// not square or not row-stochastic (1e-9).
ErgodicityReport check_ergodic(const Eigen::MatrixXd& p);

class NonErgodicError : public DataError {
 public:
  explicit NonErgodicError(ErgodicityReport report)
      : DataError("chain is not ergodic: " + report.describe()), report_(std::move(report)) {}
  const ErgodicityReport& report() const noexcept { return report_; }

 private:
  ErgodicityReport report_;
};

struct StationaryDistribution {
  Eigen::VectorXd pi;
  double residual = 0.0;  // ||pi P - pi||_inf
};

/// Solves pi = pi P, sum(pi) = 1 by LU with one balance row replaced by the
/// normalization row. Throws NonErgodicError for non-ergodic chains.
StationaryDistribution stationary(const Eigen::MatrixXd& p);
inline StationaryDistribution stationary(const TransitionMatrix& m) { return stationary(m.p); }

/// States of the single closed class when the chain has exactly one and it is
/// aperiodic; empty otherwise. Transient states are allowed.
std::vector<int> unique_recurrent_class(const Eigen::MatrixXd& p);

/// As `stationary`, but also accepts chains whose transient states carry zero
/// mass (e.g. a fault-free chain where HOF is never entered).
StationaryDistribution stationary_unichain(const Eigen::MatrixXd& p);

struct ClosedFormAux {
  std::vector<double> a;  // a_1..a_n: path products from NORM into A_i
  std::vector<double> b;  // b_1..b_m: path products from WAIT into B_j
  double alpha_cf = 0.0;
  double beta_cf = 0.0;
  double phi_cf = 0.0;
  double delta_cf = 0.0;
  double lambda_cf = 0.0;
};

struct ClosedFormResult {
  std::optional<double> pi_hof;  // closed form; empty when an auxiliary denominator vanishes
  std::optional<double> pi_norm;
  std::optional<double> pi_wait;
  double solved_pi_hof = 0.0;  // linear solve, authoritative
  std::optional<double> discrepancy;
  ClosedFormAux aux;
  std::string undefined_reason;
};

/// Product-form steady state of the CHO chain (pi_HOF = 1 - phi pi_NORM - delta pi_WAIT)
/// evaluated alongside the linear solve. The solve accepts unichain input;
/// throws NonErgodicError otherwise.
ClosedFormResult closed_form_pi_hof(const TransitionMatrix& m);

enum class A3ChainMode {
  direct_handover,  // WAIT -> NORM with probability 1
  hof_override,     // WAIT -> HOF with probability 1
};

/// Reduced A3 topology built from an estimate with no execution states (m = 0).
/// HOF -> NORM is forced to 1 in both modes.
TransitionMatrix a3_chain(const TransitionMatrix& estimated, A3ChainMode mode);

/// The chain matrix with every allowed edge set from `edge_probability(from, to)`
/// and rows normalized; used to build reference chains with a known topology.
template <typename EdgeFn>
Eigen::MatrixXd chain_from_edges(const StateSpace& space, EdgeFn edge_probability) {
  const int k = space.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j)
      if (space.allowed(i, j)) p(i, j) = edge_probability(i, j);
    const double s = p.row(i).sum();
    if (s > 0.0) p.row(i) /= s;
  }
  return p;
}

}  // namespace cho
