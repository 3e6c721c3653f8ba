#pragma once

#include "nnq/problem.hpp"

namespace nnq {

// Free-variable subproblem: min ½ yᵀHy + gᵀy  s.t.  B_F y ≥ b, C_F y = c, y ≥ 0,
// with H = 2·Q[F,F] so the reduced objective equals f restricted to the free set.
// Fixed (active) variables are eliminated by extraction rather than constrained.
template <typename Scalar>
struct ReducedQp {
  IndexList free;             // F, strictly increasing
  MatrixX<Scalar> hessian;    // H = 2 Q[F,F]
  VectorX<Scalar> linear;     // g = a[F]
  MatrixX<Scalar> ineq;       // B[:,F], κ_B × |F|
  VectorX<Scalar> ineq_rhs;   // b
  MatrixX<Scalar> eq;         // C[:,F], κ_C × |F|
  VectorX<Scalar> eq_rhs;     // c

  Index size() const { return static_cast<Index>(free.size()); }
  Index n_ineq() const { return ineq_rhs.size(); }
  Index n_eq() const { return eq_rhs.size(); }

  Scalar objective(const VectorX<Scalar>& y) const {
    return Scalar(0.5) * y.dot(hessian * y) + linear.dot(y);
  }
};

// Dense gather of sparse columns F: out = M[:, F]. A constraint block with no
// rows may also be 0×0 (default-constructed), so bail before touching columns.
template <typename Scalar>
MatrixX<Scalar> gather_columns(const SparseMatrix<Scalar>& M, const IndexList& F) {
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(M.rows(), static_cast<Index>(F.size()));
  if (M.rows() == 0) return out;
  for (Index j = 0; j < out.cols(); ++j) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(M, F[j]); it; ++it) {
      out(it.row(), j) = it.value();
    }
  }
  return out;
}

template <typename Scalar>
ReducedQp<Scalar> extract_subproblem(const Problem<Scalar>& p, const IndexList& active_set) {
  for (Index i : active_set) require(i >= 0 && i < p.dim, "extract_subproblem: index out of range");
  ReducedQp<Scalar> qp;
  qp.free = complement_sorted(active_set, p.dim);
  require(!qp.free.empty(), "extract_subproblem: empty free set, nothing to optimize");
  qp.hessian = p.gram.gather_scaled(qp.free, Scalar(2));
  qp.linear.resize(qp.size());
  for (Index j = 0; j < qp.size(); ++j) qp.linear[j] = p.linear[qp.free[j]];
  qp.ineq = gather_columns(p.ineq_matrix, qp.free);
  qp.ineq_rhs = p.ineq_rhs;
  qp.eq = gather_columns(p.eq_matrix, qp.free);
  qp.eq_rhs = p.eq_rhs;
  return qp;
}

// Scatter a reduced vector back into ν dimensions (zeros on the active set).
template <typename Scalar>
VectorX<Scalar> scatter(const IndexList& free, const VectorX<Scalar>& reduced, Index dim) {
  require(static_cast<Index>(free.size()) == reduced.size(), "scatter: size mismatch");
  VectorX<Scalar> out = VectorX<Scalar>::Zero(dim);
  for (Index j = 0; j < reduced.size(); ++j) out[free[j]] = reduced[j];
  return out;
}

// Gather a ν-vector onto the free coordinates.
template <typename Scalar>
VectorX<Scalar> restrict_to(const IndexList& free, const VectorX<Scalar>& full) {
  VectorX<Scalar> out(static_cast<Index>(free.size()));
  for (Index j = 0; j < out.size(); ++j) out[j] = full[free[j]];
  return out;
}

}  // namespace nnq
