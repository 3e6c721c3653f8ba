#pragma once

#include "nnq/point_cloud.hpp"
#include "nnq/problem.hpp"

#include <numeric>

namespace nnq {

// Minimum enclosing ball, dual form: minimize xᵀQx + aᵀx over the simplex
// (1ᵀx = 1, x ≥ 0) with Q[i,j] = p_i·p_j and a_i = −‖p_i‖². The optimal value
// is −r²; the center is the support combination Σ x_i p_i.
template <typename Scalar>
Problem<Scalar> build_meb(const PointCloud<Scalar>& cloud) {
  const Index n = cloud.size();
  require(n >= 1, "build_meb: need at least one point");
  MatrixX<Scalar> Q = cloud.points * cloud.points.transpose();
  VectorX<Scalar> a = -Q.diagonal();

  Problem<Scalar> p;
  p.dim = n;
  p.gram = GramMatrix<Scalar>(std::move(Q));
  p.linear = std::move(a);
  p.ineq_matrix.resize(0, n);
  std::vector<Triplet<Scalar>> trip;
  for (Index i = 0; i < n; ++i) trip.emplace_back(0, i, Scalar(1));
  p.eq_matrix.resize(1, n);
  p.eq_matrix.setFromTriplets(trip.begin(), trip.end());
  p.eq_rhs = VectorX<Scalar>::Ones(1);
  p.label = Family::meb;
  return p;
}

// Free set: the min(d+1, n) points farthest from the centroid, ties broken by
// lower index.
template <typename Scalar>
IndexList init_meb(const PointCloud<Scalar>& cloud) {
  const Index n = cloud.size(), d = cloud.dim();
  require(n >= 1, "init_meb: empty cloud");
  const VectorX<Scalar> centroid = cloud.points.colwise().mean().transpose();
  std::vector<std::pair<Scalar, Index>> by_dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    by_dist[i] = {(cloud.points.row(i).transpose() - centroid).squaredNorm(), i};
  std::sort(by_dist.begin(), by_dist.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  IndexList free;
  const Index take = std::min(d + 1, n);
  for (Index k = 0; k < take; ++k) free.push_back(by_dist[k].second);
  return complement_sorted(sorted_unique(std::move(free)), n);
}

template <typename Scalar>
VectorX<Scalar> meb_center(const PointCloud<Scalar>& cloud, const VectorX<Scalar>& x) {
  return cloud.points.transpose() * x;
}

template <typename Scalar>
Scalar meb_radius(Scalar optimal_objective) {
  return std::sqrt(std::max(Scalar(0), -optimal_objective));
}

}  // namespace nnq
