#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cho {

// Stream tags used when splitting a master seed.
inline constexpr std::uint64_t kMobilityStream = 0x6d6f62ULL;
inline constexpr std::uint64_t kLinkStream = 0x6c6e6bULL;
inline constexpr std::uint64_t kChainStream = 0x63686eULL;

/// Deterministic random stream. Seeded from a master seed plus a path of
/// identifiers (ue id, gnb id, tag) so sibling streams never share state.
class SeededStream {
 public:
  SeededStream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  double gaussian(double mean, double stddev) { return mean + stddev * normal_(engine_); }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(engine_);
  }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace cho
