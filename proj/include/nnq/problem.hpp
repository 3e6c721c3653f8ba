#pragma once

#include "nnq/gram.hpp"
#include "nnq/types.hpp"

#include <random>

namespace nnq {

// min xᵀQx + aᵀx  s.t.  Bx ≥ b, Cx = c, x ≥ 0.
// Q = AᵀA is positive semidefinite; ∇f(x) = 2Qx + a. κ_B = 0 and/or κ_C = 0 allowed.
template <typename Scalar>
struct Problem {
  Index dim = 0;                      // ν
  GramMatrix<Scalar> gram;            // Q
  VectorX<Scalar> linear;             // a
  SparseMatrix<Scalar> ineq_matrix;   // B, κ_B × ν
  VectorX<Scalar> ineq_rhs;           // b
  SparseMatrix<Scalar> eq_matrix;     // C, κ_C × ν
  VectorX<Scalar> eq_rhs;             // c
  Family label = Family::generic;
  // Constant excluded from the optimized objective but added to reported values
  // (ZHLG carries (μ/2)n, NNLS carries ‖b‖² so reports read as ‖Ax−b‖²).
  Scalar objective_offset = 0;

  Index n_ineq() const { return ineq_rhs.size(); }
  Index n_eq() const { return eq_rhs.size(); }
};

template <typename Scalar, typename Derived>
Problem<Scalar> make_unconstrained(GramMatrix<Scalar> gram, const Eigen::MatrixBase<Derived>& linear,
                                   Family label = Family::generic) {
  Problem<Scalar> p;
  p.dim = gram.rows();
  require(linear.size() == p.dim, "make_unconstrained: a has wrong dimension");
  p.gram = std::move(gram);
  p.linear = linear;
  p.ineq_matrix.resize(0, p.dim);
  p.eq_matrix.resize(0, p.dim);
  p.label = label;
  return p;
}

// f(x) = xᵀQx + aᵀx  (objective_offset excluded)
template <typename Scalar, typename Derived>
Scalar objective(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  require(x.size() == p.dim, "objective: x has wrong dimension");
  return p.gram.quad(x) + p.linear.dot(x);
}

// Indices with x_i > eps, ascending.
template <typename Derived>
IndexList support_of(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar eps) {
  IndexList s;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] > eps) s.push_back(i);
  return s;
}

// ∇f(x) = 2Qx + a, accumulating only the columns of Q indexed by supp(x).
template <typename Scalar, typename Derived>
VectorX<Scalar> gradient(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& x,
                         const IndexList& support) {
  require(x.size() == p.dim, "gradient: x has wrong dimension");
  VectorX<Scalar> g = p.linear;
  p.gram.accumulate_columns(x, support, Scalar(2), g);
  return g;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> gradient(const Problem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  IndexList support;
  for (Index i = 0; i < x.size(); ++i)
    if (x[i] != Scalar(0)) support.push_back(i);
  return gradient(p, x, support);
}

// Bound-constraint multipliers from the first KKT condition:
// v = ∇f(x) − Bᵀu − Cᵀũ.
template <typename Scalar, typename DX, typename DU, typename DE>
VectorX<Scalar> recover_reduced_cost(const Problem<Scalar>& p, const Eigen::MatrixBase<DX>& x,
                                     const Eigen::MatrixBase<DU>& u,
                                     const Eigen::MatrixBase<DE>& u_eq) {
  require(u.size() == p.n_ineq() && u_eq.size() == p.n_eq(),
          "recover_reduced_cost: dual dimensions inconsistent");
  VectorX<Scalar> v = gradient(p, x);
  if (u.size() > 0) v.noalias() -= p.ineq_matrix.transpose() * u.derived();
  if (u_eq.size() > 0) v.noalias() -= p.eq_matrix.transpose() * u_eq.derived();
  return v;
}

// u ≥ 0 on Bx ≥ b, ũ free on Cx = c, v the recovered bound multipliers.
template <typename Scalar>
struct DualCertificate {
  VectorX<Scalar> ineq_dual;     // u
  VectorX<Scalar> eq_dual;       // ũ
  VectorX<Scalar> reduced_cost;  // v
};

// The four §-KKT conditions measured on the original problem. Stationarity holds
// by construction of v; the residuals below are the checkable remainder.
template <typename Scalar>
struct KktReport {
  Scalar min_reduced_cost = 0;  // min_i v_i        (dual feasibility, bounds)
  Scalar min_ineq_dual = 0;     // min_j u_j        (dual feasibility, Bx ≥ b)
  Scalar ineq_violation = 0;    // max_j (b − Bx)_j, 0 when κ_B = 0
  Scalar eq_violation = 0;      // ‖Cx − c‖∞
  Scalar min_primal = 0;        // min_i x_i
  Scalar comp_ineq = 0;         // max_j |u_j (b − Bx)_j|
  Scalar comp_bound = 0;        // max_i |v_i x_i|
  bool dual_feasible = false;
  bool primal_feasible = false;
  bool complementary = false;
  bool ok() const { return dual_feasible && primal_feasible && complementary; }
};

template <typename Scalar>
KktReport<Scalar> check_kkt(const Problem<Scalar>& p, const VectorX<Scalar>& x,
                            const DualCertificate<Scalar>& cert,
                            const Tolerances<Scalar>& tol = {}) {
  KktReport<Scalar> r;
  const Scalar a_scale = Scalar(1) + (p.linear.size() ? p.linear.template lpNorm<Eigen::Infinity>() : Scalar(0));
  const Scalar eps_v = tol.reduced_cost * a_scale;
  const Scalar eps_cs = tol.comp_slack * a_scale;

  r.min_reduced_cost = cert.reduced_cost.size() ? cert.reduced_cost.minCoeff() : Scalar(0);
  r.min_ineq_dual = cert.ineq_dual.size() ? cert.ineq_dual.minCoeff() : Scalar(0);
  r.min_primal = x.size() ? x.minCoeff() : Scalar(0);
  r.comp_bound = cert.reduced_cost.size()
                     ? cert.reduced_cost.cwiseProduct(x).template lpNorm<Eigen::Infinity>()
                     : Scalar(0);

  if (p.n_ineq() > 0) {
    VectorX<Scalar> slack = p.ineq_matrix * x - p.ineq_rhs;  // ≥ 0 wanted
    r.ineq_violation = std::max(Scalar(0), -slack.minCoeff());
    r.comp_ineq = cert.ineq_dual.cwiseProduct(slack).template lpNorm<Eigen::Infinity>();
  }
  if (p.n_eq() > 0) {
    r.eq_violation = (p.eq_matrix * x - p.eq_rhs).template lpNorm<Eigen::Infinity>();
  }

  const Scalar b_scale = Scalar(1) + (p.ineq_rhs.size() ? p.ineq_rhs.template lpNorm<Eigen::Infinity>() : Scalar(0));
  const Scalar c_scale = Scalar(1) + (p.eq_rhs.size() ? p.eq_rhs.template lpNorm<Eigen::Infinity>() : Scalar(0));
  r.dual_feasible = r.min_reduced_cost >= -eps_v && r.min_ineq_dual >= -eps_v;
  r.primal_feasible = r.min_primal >= Scalar(0) && r.ineq_violation <= tol.primal * b_scale &&
                      r.eq_violation <= tol.primal * c_scale;
  r.complementary = r.comp_ineq <= eps_cs && r.comp_bound <= eps_cs;
  return r;
}

// Structural checks used by builder tests: symmetry and sampled Rayleigh quotients.
template <typename Scalar>
bool validate_problem(const Problem<Scalar>& p, int samples = 32, unsigned seed = 0) {
  if (p.linear.size() != p.dim || p.gram.rows() != p.dim) return false;
  if (p.ineq_matrix.cols() != p.dim || p.ineq_matrix.rows() != p.ineq_rhs.size()) return false;
  if (p.eq_matrix.cols() != p.dim || p.eq_matrix.rows() != p.eq_rhs.size()) return false;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Scalar sym_err = 0, scale = 0;
  for (int s = 0; s < samples; ++s) {
    VectorX<Scalar> x(p.dim), y(p.dim);
    for (Index i = 0; i < p.dim; ++i) x[i] = Scalar(gauss(rng));
    for (Index i = 0; i < p.dim; ++i) y[i] = Scalar(gauss(rng));
    const VectorX<Scalar> qx = p.gram.multiply(x);
    // symmetry via yᵀQx = xᵀQy
    sym_err = std::max(sym_err, std::abs(y.dot(qx) - x.dot(p.gram.multiply(y))));
    scale = std::max(scale, std::abs(y.dot(qx)));
    // PSD via sampled Rayleigh quotients
    const Scalar rayleigh = x.dot(qx) / x.squaredNorm();
    if (rayleigh < Scalar(-1e-9)) return false;
  }
  return sym_err <= Scalar(1e-12) * (Scalar(1) + scale);
}

}  // namespace nnq
