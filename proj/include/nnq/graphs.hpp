#pragma once

#include "nnq/edge_index.hpp"
#include "nnq/point_cloud.hpp"
#include "nnq/problem.hpp"
#include "nnq/sampling.hpp"

namespace nnq {

// Graph fitting over edge weights x of the complete graph:
//   minimize Σ_i ‖Σ_j x_{i△j}(p_i − p_j)‖²  s.t.  Bx ≥ 1_n, x ≥ 0.
// The Gram column of edge (i,j) holds p_i−p_j in block i and p_j−p_i in block j,
// so two edges interact only when they share a vertex:
//   Q[(i,j),(i,k)] = (p_i−p_j)·(p_i−p_k),  Q[e,e] = 2‖p_i−p_j‖².
// B is the complete-graph incidence matrix, b = 1_n.
template <typename Scalar>
Problem<Scalar> build_dksg(const PointCloud<Scalar>& cloud) {
  const Index n = cloud.size();
  require(n >= 2, "build_dksg: need at least two points");
  const EdgeIndex edges(n);
  const Index nu = edges.count();
  const MatrixX<Scalar> dots = cloud.points * cloud.points.transpose();  // D[i,j] = p_i·p_j

  std::vector<Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (n - 1) * (n - 2) + nu);
  for (Index v = 0; v < n; ++v) {
    for (Index w1 = 0; w1 < n; ++w1) {
      if (w1 == v) continue;
      const Index e1 = edges.encode(std::min(v, w1), std::max(v, w1));
      for (Index w2 = w1 + 1; w2 < n; ++w2) {
        if (w2 == v) continue;
        const Index e2 = edges.encode(std::min(v, w2), std::max(v, w2));
        // (p_v − p_w1)·(p_v − p_w2)
        const Scalar val = dots(v, v) - dots(v, w2) - dots(w1, v) + dots(w1, w2);
        trip.emplace_back(e1, e2, val);
        trip.emplace_back(e2, e1, val);
      }
    }
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Scalar d2 = dots(i, i) - 2 * dots(i, j) + dots(j, j);
      trip.emplace_back(edges.encode(i, j), edges.encode(i, j), 2 * d2);
    }
  SparseMatrix<Scalar> Q(nu, nu);
  Q.setFromTriplets(trip.begin(), trip.end());

  std::vector<Triplet<Scalar>> btrip;
  btrip.reserve(2 * static_cast<std::size_t>(nu));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      btrip.emplace_back(i, edges.encode(i, j), Scalar(1));
      btrip.emplace_back(j, edges.encode(i, j), Scalar(1));
    }
  SparseMatrix<Scalar> B(n, nu);
  B.setFromTriplets(btrip.begin(), btrip.end());

  Problem<Scalar> p;
  p.dim = nu;
  p.gram = GramMatrix<Scalar>(std::move(Q));
  p.linear = VectorX<Scalar>::Zero(nu);
  p.ineq_matrix = std::move(B);
  p.ineq_rhs = VectorX<Scalar>::Ones(n);
  p.eq_matrix.resize(0, nu);
  p.label = Family::dksg;
  return p;
}

// Free set: β0 sampled edges plus the star of vertex 0. The star touches every
// vertex, so x = 1 on it already satisfies Bx ≥ 1 — the first subproblem is
// always feasible.
template <typename Scalar>
IndexList init_dksg(const PointCloud<Scalar>& cloud, Index beta0, std::uint64_t seed) {
  const Index n = cloud.size();
  require(n >= 2, "init_dksg: need at least two points");
  const EdgeIndex edges(n);
  std::mt19937_64 rng(seed);
  IndexList free = sample_distinct_indices(edges.count(), beta0, rng);
  for (Index j = 1; j < n; ++j) free.push_back(edges.encode(0, j));
  return complement_sorted(sorted_unique(std::move(free)), edges.count());
}

// Graph fitting with a soft degree target:
//   minimize (1/d)bᵀx + (μ/2)‖Ux − 1_n‖² + (ρ/2)‖x‖²  over x ≥ 0,
// with b_e = ‖p_i−p_j‖² and U the incidence matrix. Expanded into the solver
// form this is Q = (μ/2)UᵀU + (ρ/2)I and a_e = (1/d)‖p_i−p_j‖² − 2μ, plus the
// constant (μ/2)n carried as objective_offset. (UᵀU)[e,e'] counts shared
// vertices: 2 on the diagonal, 1 when the edges share an endpoint.
template <typename Scalar>
Problem<Scalar> build_zhlg(const PointCloud<Scalar>& cloud, Scalar mu = Scalar(16),
                           Scalar rho = Scalar(2)) {
  const Index n = cloud.size();
  require(n >= 2, "build_zhlg: need at least two points");
  const Index d = cloud.dim();
  const EdgeIndex edges(n);
  const Index nu = edges.count();

  std::vector<Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (n - 1) * (n - 2) + nu);
  const Scalar half_mu = mu / 2;
  for (Index v = 0; v < n; ++v)
    for (Index w1 = 0; w1 < n; ++w1) {
      if (w1 == v) continue;
      const Index e1 = edges.encode(std::min(v, w1), std::max(v, w1));
      for (Index w2 = w1 + 1; w2 < n; ++w2) {
        if (w2 == v) continue;
        const Index e2 = edges.encode(std::min(v, w2), std::max(v, w2));
        trip.emplace_back(e1, e2, half_mu);
        trip.emplace_back(e2, e1, half_mu);
      }
    }
  for (Index e = 0; e < nu; ++e) trip.emplace_back(e, e, mu + rho / 2);
  SparseMatrix<Scalar> Q(nu, nu);
  Q.setFromTriplets(trip.begin(), trip.end());

  VectorX<Scalar> a(nu);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const Scalar d2 = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
      a[edges.encode(i, j)] = d2 / Scalar(d) - 2 * mu;
    }

  Problem<Scalar> p = make_unconstrained(GramMatrix<Scalar>(std::move(Q)), std::move(a), Family::zhlg);
  p.objective_offset = half_mu * Scalar(n);
  return p;
}

// Free set: β0 indices sampled from [ν] without replacement.
inline IndexList init_random_subset(Index nu, Index beta0, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return complement_sorted(sample_distinct_indices(nu, beta0, rng), nu);
}

inline IndexList init_zhlg(Index n, Index beta0, std::uint64_t seed) {
  require(n >= 2, "init_zhlg: need at least two points");
  return init_random_subset(n * (n - 1) / 2, beta0, seed);
}

}  // namespace nnq
