#pragma once

#include "nnq/types.hpp"

#include <algorithm>

namespace nnq {

// Bijection between vertex pairs (i, j), i < j, of the complete graph on n
// vertices and linear edge ids in [0, n(n−1)/2), ordered lexicographically:
// (0,1), (0,2), …, (0,n−1), (1,2), …
class EdgeIndex {
 public:
  explicit EdgeIndex(Index n) : n_(n) {
    require(n >= 2, "EdgeIndex: need at least two vertices");
    row_start_.resize(static_cast<std::size_t>(n));
    Index acc = 0;
    for (Index i = 0; i < n; ++i) {
      row_start_[i] = acc;
      acc += n - 1 - i;
    }
    count_ = acc;
  }

  Index vertices() const { return n_; }
  Index count() const { return count_; }  // n(n−1)/2

  Index encode(Index i, Index j) const {
    require(i >= 0 && j > i && j < n_, "EdgeIndex: bad vertex pair");
    return row_start_[i] + (j - i - 1);
  }

  std::pair<Index, Index> decode(Index e) const {
    require(e >= 0 && e < count_, "EdgeIndex: edge id out of range");
    // last row with row_start ≤ e
    auto it = std::upper_bound(row_start_.begin(), row_start_.end(), e);
    const Index i = static_cast<Index>(it - row_start_.begin()) - 1;
    return {i, i + 1 + (e - row_start_[i])};
  }

 private:
  Index n_ = 0, count_ = 0;
  std::vector<Index> row_start_;
};

}  // namespace nnq
