#pragma once

#include "nnq/types.hpp"

#include <numeric>
#include <random>
#include <unordered_set>

namespace nnq {

// `count` distinct indices from [0, n), sorted ascending, deterministic per seed.
inline IndexList sample_distinct_indices(Index n, Index count, std::mt19937_64& rng) {
  count = std::min(count, n);
  if (count <= 0) return {};
  IndexList out;
  if (count * 2 >= n) {
    // dense regime: shuffle the full range
    IndexList all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index(0));
    std::shuffle(all.begin(), all.end(), rng);
    out.assign(all.begin(), all.begin() + count);
  } else {
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::unordered_set<Index> seen;
    while (static_cast<Index>(out.size()) < count) {
      const Index i = pick(rng);
      if (seen.insert(i).second) out.push_back(i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace nnq
