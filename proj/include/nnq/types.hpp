#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnq {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar>;
template <typename Scalar>
using Triplet = Eigen::Triplet<Scalar>;

using IndexList = std::vector<Index>;

enum class Family { generic, dksg, zhlg, meb, pd, nnls };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::dksg: return "dksg";
    case Family::zhlg: return "zhlg";
    case Family::meb: return "meb";
    case Family::pd: return "pd";
    case Family::nnls: return "nnls";
    default: return "generic";
  }
}

// Scale-aware tolerance block shared by the solver stack. The scaled thresholds
// eps_v and eps_cs multiply (1 + ||a||_inf) at the point of use.
template <typename Scalar>
struct Tolerances {
  Scalar support = Scalar(1e-10);     // eps_x: membership of supp(x)
  Scalar reduced_cost = Scalar(1e-9); // eps_v base: negativity test on v
  Scalar primal = Scalar(1e-8);       // eps_p: feasibility residuals
  Scalar comp_slack = Scalar(1e-7);   // eps_cs base: complementarity products
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Sorted complement of a sorted index subset of [0, n).
inline IndexList complement_sorted(const IndexList& subset, Index n) {
  IndexList out;
  out.reserve(static_cast<std::size_t>(n) - subset.size());
  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < subset.size() && subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace nnq
