#include "cho/rng.hpp"

#include <vector>

namespace cho {

SeededStream::SeededStream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (path.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (auto id : path) push(id);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

}  // namespace cho
