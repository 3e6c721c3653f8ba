#pragma once

#include "nnq/point_cloud.hpp"
#include "nnq/problem.hpp"

namespace nnq {

// Distance between conv{p_1..p_m} and conv{q_1..q_n}: with G = [p_1 … p_m −q_1 … −q_n],
// minimize xᵀGᵀGx = ‖Σ_i x_i p_i − Σ_j x_{m+j} q_j‖² subject to each weight block
// summing to 1 and x ≥ 0. The optimum is the squared distance.
template <typename Scalar>
Problem<Scalar> build_pd(const PointCloud<Scalar>& cloudP, const PointCloud<Scalar>& cloudQ) {
  const Index m = cloudP.size(), n = cloudQ.size();
  require(m >= 1 && n >= 1, "build_pd: both clouds must be nonempty");
  require(cloudP.dim() == cloudQ.dim(), "build_pd: dimension mismatch");
  const Index d = cloudP.dim(), nu = m + n;

  MatrixX<Scalar> G(d, nu);
  G.leftCols(m) = cloudP.points.transpose();
  G.rightCols(n) = -cloudQ.points.transpose();

  Problem<Scalar> p;
  p.dim = nu;
  p.gram = GramMatrix<Scalar>(MatrixX<Scalar>(G.transpose() * G));
  p.linear = VectorX<Scalar>::Zero(nu);
  p.ineq_matrix.resize(0, nu);
  std::vector<Triplet<Scalar>> trip;
  for (Index i = 0; i < m; ++i) trip.emplace_back(0, i, Scalar(1));
  for (Index j = 0; j < n; ++j) trip.emplace_back(1, m + j, Scalar(1));
  p.eq_matrix.resize(2, nu);
  p.eq_matrix.setFromTriplets(trip.begin(), trip.end());
  p.eq_rhs = VectorX<Scalar>::Ones(2);
  p.label = Family::pd;
  return p;
}

// Free set: the first min(3, m) points of one side and the first min(3, n) of
// the other ("arbitrary" pinned to the first ones for determinism).
inline IndexList init_pd(Index m, Index n) {
  require(m >= 1 && n >= 1, "init_pd: both clouds must be nonempty");
  IndexList free;
  for (Index i = 0; i < std::min<Index>(3, m); ++i) free.push_back(i);
  for (Index j = 0; j < std::min<Index>(3, n); ++j) free.push_back(m + j);
  return complement_sorted(free, m + n);
}

template <typename Scalar>
Scalar pd_distance(Scalar optimal_objective) {
  return std::sqrt(std::max(Scalar(0), optimal_objective));
}

}  // namespace nnq
