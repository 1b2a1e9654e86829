#include "cho/markov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/format.h>
#include <numeric>

namespace cho {

TransitionCounts::TransitionCounts(StateSpace space)
    : space_(space), counts_(static_cast<std::size_t>(space.size() * space.size()), 0) {}

void TransitionCounts::add(int from, int to, std::uint64_t k) {
  if (from < 0 || to < 0 || from >= space_.size() || to >= space_.size())
    throw InvariantViolation("TransitionCounts::add: state ordinal out of range");
  counts_[index(from, to)] += k;
}

void TransitionCounts::merge(const TransitionCounts& other) {
  if (!(other.space_ == space_)) throw InvariantViolation("TransitionCounts::merge: state spaces differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t TransitionCounts::row_total(int from) const {
  std::uint64_t s = 0;
  for (int j = 0; j < space_.size(); ++j) s += at(from, j);
  return s;
}

std::uint64_t TransitionCounts::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::vector<double> TransitionCounts::occupancy() const {
  const double t = static_cast<double>(total());
  std::vector<double> occ(static_cast<std::size_t>(space_.size()), 0.0);
  if (t == 0.0) return occ;
  for (int i = 0; i < space_.size(); ++i) occ[static_cast<std::size_t>(i)] = static_cast<double>(row_total(i)) / t;
  return occ;
}

TransitionMatrix estimate_matrix(const TransitionCounts& counts) {
  const StateSpace& space = counts.space();
  if (counts.total() == 0) throw DataError("estimate_matrix: trace contains no transitions");
  const int k = space.size();
  TransitionMatrix m;
  m.space = space;
  m.p = Eigen::MatrixXd::Zero(k, k);
  m.counts.resize(static_cast<std::size_t>(k * k));
  for (int i = 0; i < k; ++i) {
    const std::uint64_t row = counts.row_total(i);
    for (int j = 0; j < k; ++j) {
      const std::uint64_t c = counts.at(i, j);
      m.counts[static_cast<std::size_t>(i * k + j)] = c;
      if (c > 0 && !space.allowed(i, j))
        throw DataError(fmt::format("estimate_matrix: transition {} -> {} is not part of the chain topology",
                                    space.name(i), space.name(j)));
      if (row > 0) m.p(i, j) = static_cast<double>(c) / static_cast<double>(row);
    }
    if (row == 0) {
      m.p(i, i) = 1.0;
      m.unobserved_rows.push_back(i);
    }
  }
  return m;
}

TransitionMatrix estimate_matrix(std::span<const TraceEvent> events, const StateSpace& space) {
  TransitionCounts counts(space);
  for (const auto& ev : events) {
    if (!space.contains(ev.from) || !space.contains(ev.to))
      throw DataError("estimate_matrix: event state outside the (n, m) chain");
    counts.on_event(ev);
  }
  return estimate_matrix(counts);
}

std::string ErgodicityReport::describe(const StateSpace* names) const {
  auto state = [names](int s) { return names ? names->name(s) : fmt::format("{}", s); };
  switch (verdict) {
    case ChainClass::ergodic:
      return lemma_k ? fmt::format("ergodic (every state returns in both {} and {} steps)", *lemma_k, *lemma_k + 1)
                     : std::string("ergodic");
    case ChainClass::reducible:
      return fmt::format("reducible (state {} is not mutually reachable with state {})", state(witness_state), state(0));
    case ChainClass::periodic:
      return fmt::format("periodic (period {})", period);
  }
  return {};
}

namespace {

using Adjacency = std::vector<std::vector<int>>;

std::vector<int> bfs_levels(const Adjacency& adj, int start) {
  std::vector<int> level(adj.size(), -1);
  std::deque<int> queue{start};
  level[static_cast<std::size_t>(start)] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  return level;
}

std::optional<int> lemma_return_witness(const Eigen::MatrixXd& p) {
  const int k = static_cast<int>(p.rows());
  using BoolMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMatrix step = (p.array() > 0.0).cast<int>();
  BoolMatrix power = step;
  std::vector<int> first_k(static_cast<std::size_t>(k), -1);
  std::vector<char> previous(static_cast<std::size_t>(k), 0);
  const int limit = 4 * k + 4;
  for (int len = 1; len <= limit; ++len) {
    bool all_found = true;
    for (int s = 0; s < k; ++s) {
      const char now = power(s, s) > 0;
      if (first_k[static_cast<std::size_t>(s)] < 0 && now && previous[static_cast<std::size_t>(s)])
        first_k[static_cast<std::size_t>(s)] = len - 1;
      previous[static_cast<std::size_t>(s)] = now;
      all_found = all_found && first_k[static_cast<std::size_t>(s)] >= 0;
    }
    if (all_found) return *std::max_element(first_k.begin(), first_k.end());
    power = ((power * step).array() > 0).cast<int>();
  }
  return std::nullopt;
}

}  // namespace

ErgodicityReport check_ergodic(const Eigen::MatrixXd& p) {
  const int k = static_cast<int>(p.rows());
  if (k == 0 || p.cols() != k) throw DataError("check_ergodic: matrix must be square and nonempty");
  for (int i = 0; i < k; ++i) {
    if ((p.row(i).array() < 0.0).any()) throw DataError(fmt::format("check_ergodic: negative entry in row {}", i));
    if (std::abs(p.row(i).sum() - 1.0) > 1e-9) throw DataError(fmt::format("check_ergodic: row {} does not sum to 1", i));
  }

  Adjacency fwd(static_cast<std::size_t>(k));
  Adjacency rev(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (p(i, j) > 0.0) {
        fwd[static_cast<std::size_t>(i)].push_back(j);
        rev[static_cast<std::size_t>(j)].push_back(i);
      }

  ErgodicityReport report;
  const auto forward = bfs_levels(fwd, 0);
  const auto backward = bfs_levels(rev, 0);
  for (int s = 0; s < k; ++s) {
    if (forward[static_cast<std::size_t>(s)] < 0 || backward[static_cast<std::size_t>(s)] < 0) {
      report.verdict = ChainClass::reducible;
      report.witness_state = s;
      return report;
    }
  }

  int period = 0;
  for (int u = 0; u < k; ++u)
    for (int v : fwd[static_cast<std::size_t>(u)])
      period = std::gcd(period, std::abs(forward[static_cast<std::size_t>(u)] + 1 - forward[static_cast<std::size_t>(v)]));
  report.period = period;
  if (period != 1) {
    report.verdict = ChainClass::periodic;
    return report;
  }
  report.lemma_k = lemma_return_witness(p);
  return report;
}

namespace {

StationaryDistribution solve_balance(const Eigen::MatrixXd& p) {
  const Eigen::Index k = p.rows();
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(rhs);
  pi += lu.solve(rhs - a * pi);  // one refinement step

  for (Eigen::Index i = 0; i < k; ++i) pi(i) = std::max(pi(i), 0.0);
  pi /= pi.sum();

  StationaryDistribution out;
  out.residual = (pi.transpose() * p - pi.transpose()).cwiseAbs().maxCoeff();
  out.pi = std::move(pi);
  return out;
}

Adjacency adjacency(const Eigen::MatrixXd& p, bool reversed) {
  const int k = static_cast<int>(p.rows());
  Adjacency adj(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (p(i, j) > 0.0) adj[static_cast<std::size_t>(reversed ? j : i)].push_back(reversed ? i : j);
  return adj;
}

}  // namespace

StationaryDistribution stationary(const Eigen::MatrixXd& p) {
  const ErgodicityReport report = check_ergodic(p);
  if (report.verdict != ChainClass::ergodic) throw NonErgodicError(report);
  return solve_balance(p);
}

std::vector<int> unique_recurrent_class(const Eigen::MatrixXd& p) {
  check_ergodic(p);  // shape and stochasticity
  const int k = static_cast<int>(p.rows());
  const Adjacency fwd = adjacency(p, false);
  // A unique closed class is exactly the set of states reachable from every state.
  std::vector<int> hits(static_cast<std::size_t>(k), 0);
  for (int s = 0; s < k; ++s) {
    const auto level = bfs_levels(fwd, s);
    for (int t = 0; t < k; ++t) hits[static_cast<std::size_t>(t)] += level[static_cast<std::size_t>(t)] >= 0;
  }
  std::vector<int> cls;
  for (int t = 0; t < k; ++t)
    if (hits[static_cast<std::size_t>(t)] == k) cls.push_back(t);
  if (cls.empty()) return cls;

  const auto level = bfs_levels(fwd, cls.front());
  int period = 0;
  for (int u : cls)
    for (int v : fwd[static_cast<std::size_t>(u)])
      period = std::gcd(period, std::abs(level[static_cast<std::size_t>(u)] + 1 - level[static_cast<std::size_t>(v)]));
  if (period != 1) cls.clear();
  return cls;
}

StationaryDistribution stationary_unichain(const Eigen::MatrixXd& p) {
  const ErgodicityReport report = check_ergodic(p);
  if (report.verdict == ChainClass::ergodic) return solve_balance(p);
  if (unique_recurrent_class(p).empty()) throw NonErgodicError(report);
  return solve_balance(p);
}

ClosedFormResult closed_form_pi_hof(const TransitionMatrix& m) {
  const StateSpace& s = m.space;
  const Eigen::MatrixXd& p = m.p;
  const int n = s.prep_states();
  const int mm = s.exec_states();
  const int norm = s.norm();
  const int wait = s.wait();
  auto prep = [&](int i) { return s.ordinal(ChoState::prep(i)); };
  auto exec = [&](int j) { return s.ordinal(ChoState::exec(j)); };

  ClosedFormResult out;
  const StationaryDistribution solved = stationary_unichain(m.p);
  out.solved_pi_hof = solved.pi(s.hof());

  ClosedFormAux& aux = out.aux;
  double product = 1.0;
  for (int i = 1; i <= n; ++i) {
    product *= i == 1 ? p(norm, prep(1)) : p(prep(i - 1), prep(i));
    aux.a.push_back(product);
  }
  product = 1.0;
  for (int j = 1; j <= mm; ++j) {
    product *= j == 1 ? p(wait, exec(1)) : p(exec(j - 1), exec(j));
    aux.b.push_back(product);
  }

  aux.alpha_cf = p(norm, norm) - 1.0;
  for (int i = 1; i <= n; ++i) aux.alpha_cf += aux.a[static_cast<std::size_t>(i - 1)] * p(prep(i), norm);
  aux.beta_cf = p(wait, wait) - 1.0;
  for (int j = 1; j <= mm - 1; ++j) aux.beta_cf += aux.b[static_cast<std::size_t>(j - 1)] * p(exec(j), wait);
  aux.phi_cf = 1.0 + std::accumulate(aux.a.begin(), aux.a.end(), 0.0);
  aux.delta_cf = 1.0 + std::accumulate(aux.b.begin(), aux.b.end(), 0.0);
  aux.lambda_cf = aux.b.empty() ? 0.0 : aux.b.front();

  // Flow into WAIT from the preparation chain, and flow from the execution
  // chain back into NORM. Without A states NORM feeds WAIT directly; without
  // B states WAIT exits to NORM directly.
  const double feed = n > 0 ? aux.a.back() * p(prep(n), wait) : p(norm, wait);
  const double exit = mm > 0 ? aux.b.back() * p(exec(mm), norm) : p(wait, norm);

  if (aux.beta_cf == 0.0) {
    out.undefined_reason = "beta = 0";
    return out;
  }
  if (feed == 0.0) {
    out.undefined_reason = "WAIT is never fed from the preparation phase";
    return out;
  }
  const double norm_den = aux.phi_cf - aux.alpha_cf + (feed / aux.beta_cf) * (exit - aux.delta_cf);
  const double wait_den = (aux.alpha_cf - aux.phi_cf) * (aux.beta_cf / feed) - exit + aux.delta_cf;
  if (norm_den == 0.0 || wait_den == 0.0 || !std::isfinite(norm_den) || !std::isfinite(wait_den)) {
    out.undefined_reason = "vanishing pi_NORM / pi_WAIT denominator";
    return out;
  }
  out.pi_norm = 1.0 / norm_den;
  out.pi_wait = 1.0 / wait_den;
  out.pi_hof = 1.0 - aux.phi_cf * *out.pi_norm - aux.delta_cf * *out.pi_wait;
  out.discrepancy = std::abs(*out.pi_hof - out.solved_pi_hof);
  return out;
}

TransitionMatrix a3_chain(const TransitionMatrix& estimated, A3ChainMode mode) {
  const StateSpace& s = estimated.space;
  if (s.exec_states() != 0)
    throw InvariantViolation("a3_chain: the A3 reduction has no execution states (m must be 0)");
  TransitionMatrix out = estimated;
  const int wait = s.wait();
  const int hof = s.hof();
  out.p.row(wait).setZero();
  out.p(wait, mode == A3ChainMode::direct_handover ? s.norm() : hof) = 1.0;
  out.p.row(hof).setZero();
  out.p(hof, s.norm()) = 1.0;
  out.unobserved_rows.erase(
      std::remove_if(out.unobserved_rows.begin(), out.unobserved_rows.end(),
                     [&](int r) { return r == wait || r == hof; }),
      out.unobserved_rows.end());
  return out;
}

}  // namespace cho
