#pragma once

#include "nnq/problem.hpp"

#include <algorithm>

namespace nnq {

// Iterate state of the active-set loop. Coordinates in S_r are held at exact
// zero by construction (the subsolver only ever sees the free complement).
template <typename Scalar>
struct ActiveSetState {
  IndexList active_set;     // S_r, ascending
  VectorX<Scalar> primal;   // x_r, (x_r)_i = 0 for i ∈ S_r
  int iter = 1;             // r, counts completed subsolves
  IndexList support;        // supp(x_r) = {i : (x_r)_i > ε_x}, ascending

  void refresh_support(Scalar eps) { support = support_of(primal, eps); }
};

inline IndexList sorted_unique(IndexList v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace nnq
