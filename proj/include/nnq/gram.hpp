#pragma once

#include "nnq/types.hpp"

namespace nnq {

// Symmetric Gram matrix Q = AᵀA with a dense or compressed-sparse backing.
// The solver never sees A itself; every consumer goes through this wrapper.
// Sparse backing stores the full symmetric pattern (both triangles).
template <typename Scalar>
class GramMatrix {
 public:
  GramMatrix() = default;

  explicit GramMatrix(MatrixX<Scalar> dense) : dense_(std::move(dense)), is_dense_(true) {
    require(dense_.rows() == dense_.cols(), "GramMatrix: dense backing must be square");
  }

  explicit GramMatrix(SparseMatrix<Scalar> sparse) : sparse_(std::move(sparse)), is_dense_(false) {
    require(sparse_.rows() == sparse_.cols(), "GramMatrix: sparse backing must be square");
    sparse_.makeCompressed();
  }

  Index rows() const { return is_dense_ ? dense_.rows() : sparse_.rows(); }
  bool is_dense() const { return is_dense_; }
  const MatrixX<Scalar>& dense() const { return dense_; }
  const SparseMatrix<Scalar>& sparse() const { return sparse_; }

  // xᵀQx
  template <typename Derived>
  Scalar quad(const Eigen::MatrixBase<Derived>& x) const {
    if (is_dense_) return x.dot(dense_ * x.derived());
    return x.dot(sparse_ * x.derived());
  }

  // Qx
  template <typename Derived>
  VectorX<Scalar> multiply(const Eigen::MatrixBase<Derived>& x) const {
    if (is_dense_) return dense_ * x.derived();
    return sparse_ * x.derived();
  }

  // out += factor * Q * x accumulated column by column over supp(x) only;
  // O(ν·|supp|) dense, O(nnz of touched columns) sparse.
  template <typename Derived>
  void accumulate_columns(const Eigen::MatrixBase<Derived>& x, const IndexList& support,
                          Scalar factor, VectorX<Scalar>& out) const {
    if (is_dense_) {
      for (Index j : support) out.noalias() += (factor * x[j]) * dense_.col(j);
      return;
    }
    for (Index j : support) {
      const Scalar w = factor * x[j];
      for (typename SparseMatrix<Scalar>::InnerIterator it(sparse_, j); it; ++it) {
        out[it.row()] += w * it.value();
      }
    }
  }

  // Dense gather factor * Q[F, F]; F strictly increasing.
  MatrixX<Scalar> gather_scaled(const IndexList& F, Scalar factor) const {
    const Index k = static_cast<Index>(F.size());
    MatrixX<Scalar> out(k, k);
    if (is_dense_) {
      for (Index cj = 0; cj < k; ++cj)
        for (Index ci = 0; ci < k; ++ci) out(ci, cj) = factor * dense_(F[ci], F[cj]);
      return out;
    }
    out.setZero();
    // position of each global row inside F, or -1
    std::vector<Index> pos(static_cast<std::size_t>(sparse_.rows()), Index(-1));
    for (Index ci = 0; ci < k; ++ci) pos[F[ci]] = ci;
    for (Index cj = 0; cj < k; ++cj) {
      for (typename SparseMatrix<Scalar>::InnerIterator it(sparse_, F[cj]); it; ++it) {
        const Index ci = pos[it.row()];
        if (ci >= 0) out(ci, cj) = factor * it.value();
      }
    }
    return out;
  }

  Scalar trace() const {
    if (is_dense_) return dense_.trace();
    Scalar t = 0;
    for (Index j = 0; j < sparse_.outerSize(); ++j) t += sparse_.coeff(j, j);
    return t;
  }

 private:
  MatrixX<Scalar> dense_;
  SparseMatrix<Scalar> sparse_;
  bool is_dense_ = true;
};

}  // namespace nnq
