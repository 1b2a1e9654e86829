#pragma once

// Independent reference computations used as test oracles. None of these
// call into the library's solvers.

#include <Eigen/Dense>
#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Left power iteration pi <- pi P from the uniform vector until the update
/// is below `tol` or `max_steps` is reached.
inline Eigen::VectorXd power_iteration(const Eigen::MatrixXd& p, int max_steps = 1'000'000, double tol = 1e-15) {
  const Eigen::Index k = p.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(k, 1.0 / static_cast<double>(k));
  for (int s = 0; s < max_steps; ++s) {
    Eigen::RowVectorXd next = pi * p;
    next /= next.sum();
    const double delta = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (delta < tol) break;
  }
  return pi.transpose();
}

/// Random row-stochastic matrix whose positive-entry graph contains a
/// Hamiltonian cycle and a self-loop, hence irreducible and aperiodic.
inline Eigen::MatrixXd random_ergodic(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
  const double density = 0.1 + 0.8 * u(rng);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (u(rng) < density) p(i, j) = u(rng);
  for (int i = 0; i < k; ++i) {
    const int a = order[static_cast<std::size_t>(i)];
    const int b = order[static_cast<std::size_t>((i + 1) % k)];
    p(a, b) += 0.05 + u(rng);
  }
  p(order[0], order[0]) += 0.1;
  for (int i = 0; i < k; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

/// Samples `steps` transitions of the chain from state `start` and returns
/// the (row-major) transition counts.
inline std::vector<std::uint64_t> sample_chain_counts(const Eigen::MatrixXd& p, std::uint64_t steps, int start,
                                                      std::uint64_t seed) {
  const int k = static_cast<int>(p.rows());
  std::vector<std::discrete_distribution<int>> rows;
  for (int i = 0; i < k; ++i) {
    std::vector<double> w(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) w[static_cast<std::size_t>(j)] = p(i, j);
    rows.emplace_back(w.begin(), w.end());
  }
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k * k), 0);
  int s = start;
  for (std::uint64_t t = 0; t < steps; ++t) {
    const int next = rows[static_cast<std::size_t>(s)](rng);
    ++counts[static_cast<std::size_t>(s * k + next)];
    s = next;
  }
  return counts;
}

/// Central binomial acceptance region holding `coverage` of the mass.
inline bool within_binomial_region(std::uint64_t observed, std::uint64_t trials, double p, double coverage) {
  if (p <= 0.0) return observed == 0;
  if (p >= 1.0) return observed == trials;
  const boost::math::binomial_distribution<double> dist(static_cast<double>(trials), p);
  const double tail = (1.0 - coverage) / 2.0;
  const double lo = std::floor(boost::math::quantile(dist, tail));
  const double hi = std::ceil(boost::math::quantile(boost::math::complement(dist, tail)));
  const double x = static_cast<double>(observed);
  return x >= lo && x <= hi;
}

/// Pearson chi-square goodness-of-fit p-value against a continuous CDF,
/// with `bins` equiprobable bins.
inline double chi_square_gof_p(const std::vector<double>& xs, const std::function<double(double)>& cdf, int bins) {
  std::vector<double> observed(static_cast<std::size_t>(bins), 0.0);
  for (double x : xs) {
    const int b = std::min(bins - 1, static_cast<int>(cdf(x) * bins));
    observed[static_cast<std::size_t>(b)] += 1.0;
  }
  const double expected = static_cast<double>(xs.size()) / bins;
  double stat = 0.0;
  for (double o : observed) stat += (o - expected) * (o - expected) / expected;
  const boost::math::chi_squared_distribution<double> chi(bins - 1);
  return boost::math::cdf(boost::math::complement(chi, stat));
}

/// Edges of the CHO chain over ordinals NORM=0, A_i=i, WAIT=n+1,
/// B_j=n+1+j, HOF=n+m+2, written out from the state-machine rules.
inline std::vector<std::pair<int, int>> cho_edges(int n, int m) {
  const int wait = n + 1;
  const int hof = n + m + 2;
  std::vector<std::pair<int, int>> e;
  e.emplace_back(0, 0);
  e.emplace_back(0, n > 0 ? 1 : wait);
  for (int i = 1; i <= n; ++i) {
    e.emplace_back(i, i < n ? i + 1 : wait);
    if (i < n) e.emplace_back(i, 0);
    e.emplace_back(i, hof);
  }
  e.emplace_back(wait, wait);
  e.emplace_back(wait, m > 0 ? wait + 1 : 0);
  e.emplace_back(wait, hof);
  for (int j = 1; j <= m; ++j) {
    const int b = wait + j;
    e.emplace_back(b, j < m ? b + 1 : 0);
    if (j < m) e.emplace_back(b, wait);
    e.emplace_back(b, hof);
  }
  e.emplace_back(hof, 0);
  return e;
}

/// The CHO chain with every edge weighted by `w(from, to)`, rows normalized.
inline Eigen::MatrixXd cho_chain(int n, int m, const std::function<double(int, int)>& w) {
  const int k = n + m + 3;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
  for (auto [i, j] : cho_edges(n, m)) p(i, j) = w(i, j);
  for (int i = 0; i < k; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

}  // namespace oracle
