#pragma once

#include "nnq/reduced_qp.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>
#include <optional>

namespace nnq {

enum class SubsolverStatus { ok, infeasible, max_iterations, factorization_failure };

inline const char* to_string(SubsolverStatus s) {
  switch (s) {
    case SubsolverStatus::ok: return "ok";
    case SubsolverStatus::infeasible: return "infeasible-detected";
    case SubsolverStatus::max_iterations: return "max-iterations-exceeded";
    default: return "factorization-failure";
  }
}

// Solution of a ReducedQp with the full multiplier set. bound_dual holds the
// multipliers of x_F ≥ 0; the driver stitches them into the ν-dimensional v.
template <typename Scalar>
struct SubsolverReport {
  VectorX<Scalar> primal;      // x_F
  VectorX<Scalar> ineq_dual;   // u ≥ 0
  VectorX<Scalar> eq_dual;     // ũ
  VectorX<Scalar> bound_dual;  // multipliers of x_F ≥ 0
  Scalar kkt_residual = 0;     // scaled max of stationarity/feasibility/gap
  int iterations = 0;
  SubsolverStatus status = SubsolverStatus::ok;
  Scalar objective = 0;        // ½xᵀHx + gᵀx at primal
};

template <typename Scalar>
struct SubsolverOptions {
  int max_iterations = 100;
  Scalar tol = Scalar(1e-9);     // ε_sub base, applied to scaled residuals
  Scalar floor = Scalar(2e-14);  // stop polishing below this scaled residual
};

namespace detail {

// Largest α ∈ [0,1] with v + α·dv ≥ 0 (v > 0 on entry).
template <typename Scalar>
Scalar max_step(const VectorX<Scalar>& v, const VectorX<Scalar>& dv) {
  Scalar a = 1;
  for (Index i = 0; i < v.size(); ++i)
    if (dv[i] < Scalar(0)) a = std::min(a, -v[i] / dv[i]);
  return a;
}

// Unscaled optimality defect of (x, u, y): stationarity on the support, sign of
// the recovered bound multiplier off it, feasibility, and complementarity, all
// absolute. The driver's candidate test is absolute too, which is why the
// crossover accept rule keys on this rather than on the scaled residual.
template <typename Scalar>
Scalar optimality_defect(const ReducedQp<Scalar>& qp, const VectorX<Scalar>& x,
                         const VectorX<Scalar>& u, const VectorX<Scalar>& y,
                         VectorX<Scalar>* z_out = nullptr) {
  VectorX<Scalar> z = qp.hessian * x + qp.linear;
  if (qp.n_eq() > 0) z.noalias() -= qp.eq.transpose() * y;
  if (qp.n_ineq() > 0) z.noalias() -= qp.ineq.transpose() * u;
  Scalar defect = 0;
  for (Index i = 0; i < x.size(); ++i)
    defect = std::max(defect, x[i] > Scalar(1e-10) ? std::abs(z[i])
                                                   : std::max(Scalar(0), -z[i]));
  if (qp.n_eq() > 0)
    defect = std::max(defect, (qp.eq * x - qp.eq_rhs).template lpNorm<Eigen::Infinity>());
  if (qp.n_ineq() > 0) {
    const VectorX<Scalar> slack = qp.ineq * x - qp.ineq_rhs;
    defect = std::max(defect, std::max(Scalar(0), -slack.minCoeff()));
    defect = std::max(defect, std::max(Scalar(0), -u.minCoeff()));
    defect = std::max(defect, slack.cwiseProduct(u).template lpNorm<Eigen::Infinity>());
  }
  if (z_out) *z_out = std::move(z);
  return defect;
}

// Crossover: one exact KKT solve on the discovered support and active rows.
// The interior-point floor is relative to the problem scale, so a badly scaled
// H can leave absolute stationarity dust above the driver's candidate
// tolerance; the direct solve removes it. The candidate is clamped to the
// feasible signs and accepted only when its defect does not increase, so a
// misidentified support falls back to the interior-point answer unchanged.
template <typename Scalar>
void crossover(const ReducedQp<Scalar>& qp, SubsolverReport<Scalar>& rep, Scalar g_scale) {
  using V = VectorX<Scalar>;
  const Index nx = qp.size(), mB = qp.n_ineq(), mC = qp.n_eq();
  IndexList S;
  for (Index i = 0; i < nx; ++i)
    if (rep.primal[i] > Scalar(0)) S.push_back(i);
  const Index k = static_cast<Index>(S.size());
  if (k == 0) return;

  IndexList J;
  if (mB > 0) {
    const V slack = qp.ineq * rep.primal - qp.ineq_rhs;
    const Scalar u_scale = rep.ineq_dual.template lpNorm<Eigen::Infinity>();
    for (Index j = 0; j < mB; ++j)
      if (slack[j] <= Scalar(1e-8) * (1 + std::abs(qp.ineq_rhs[j])) ||
          rep.ineq_dual[j] > Scalar(1e-8) * (1 + u_scale))
        J.push_back(j);
  }
  const Index mJ = static_cast<Index>(J.size()), m = mC + mJ;

  MatrixX<Scalar> K = MatrixX<Scalar>::Zero(k + m, k + m);
  V rhs(k + m);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) K(i, j) = qp.hessian(S[i], S[j]);
    rhs[i] = -qp.linear[S[i]];
  }
  for (Index r = 0; r < mC; ++r) {
    for (Index i = 0; i < k; ++i) {
      K(k + r, i) = qp.eq(r, S[i]);
      K(i, k + r) = -qp.eq(r, S[i]);
    }
    rhs[k + r] = qp.eq_rhs[r];
  }
  for (Index t = 0; t < mJ; ++t) {
    for (Index i = 0; i < k; ++i) {
      K(k + mC + t, i) = qp.ineq(J[t], S[i]);
      K(i, k + mC + t) = -qp.ineq(J[t], S[i]);
    }
    rhs[k + mC + t] = qp.ineq_rhs[J[t]];
  }
  const V sol = K.fullPivLu().solve(rhs);

  V x2 = V::Zero(nx);
  for (Index i = 0; i < k; ++i) x2[S[i]] = std::max(sol[i], Scalar(0));
  V y2 = mC > 0 ? V(sol.segment(k, mC)) : V();
  V u2 = V::Zero(mB);
  for (Index t = 0; t < mJ; ++t) u2[J[t]] = std::max(sol[k + mC + t], Scalar(0));

  V z_old, z_new;
  const Scalar d_old = optimality_defect(qp, rep.primal, rep.ineq_dual, rep.eq_dual, &z_old);
  const Scalar d_new = optimality_defect(qp, x2, u2, y2, &z_new);
  if (!(d_new <= d_old)) return;  // also rejects a NaN candidate

  rep.primal = std::move(x2);
  rep.eq_dual = std::move(y2);
  rep.ineq_dual = std::move(u2);
  rep.bound_dual = std::move(z_new);
  // stationarity is exact by construction of z, so the defect concentrates in
  // the feasibility/sign/complementarity terms; report it on the usual scale
  rep.kkt_residual = d_new / (g_scale + (qp.hessian * rep.primal).template lpNorm<Eigen::Infinity>());
}

}  // namespace detail

// Primal-dual interior-point method (Mehrotra predictor-corrector) for
//   min ½xᵀHx + gᵀx  s.t.  Cx = c, Bx ≥ b, x ≥ 0.
// Nonnegativity is folded into the barrier internally; its multipliers are
// reported separately from the Bx ≥ b block. Per Newton step the normal matrix
//   M = H + X⁻¹Z + BᵀS⁻¹UB
// is factored by LLT with a δ·I retry schedule (H = 2AᵀA may be rank-deficient),
// and equality rows are handled through the small Schur complement C M⁻¹ Cᵀ.
template <typename Scalar>
SubsolverReport<Scalar> solve_reduced(const ReducedQp<Scalar>& qp,
                                      std::optional<VectorX<Scalar>> warm_start = std::nullopt,
                                      const SubsolverOptions<Scalar>& opt = {}) {
  using V = VectorX<Scalar>;
  using M = MatrixX<Scalar>;
  const Index nx = qp.size(), mB = qp.n_ineq(), mC = qp.n_eq();
  require(nx > 0, "solve_reduced: empty problem");
  require(qp.hessian.rows() == nx && qp.hessian.cols() == nx, "solve_reduced: H size");
  if (warm_start) require(warm_start->size() == nx, "solve_reduced: warm start size");

  const Scalar g_scale = Scalar(1) + qp.linear.template lpNorm<Eigen::Infinity>();
  Scalar rhs_scale = Scalar(1);
  if (mB) rhs_scale = std::max(rhs_scale, qp.ineq_rhs.template lpNorm<Eigen::Infinity>());
  if (mC) rhs_scale = std::max(rhs_scale, qp.eq_rhs.template lpNorm<Eigen::Infinity>());

  // interior start; warm values only bias x, safety floor keeps it interior
  V x = V::Ones(nx);
  if (warm_start) x = warm_start->cwiseMax(Scalar(0.1));
  V z = V::Constant(nx, std::max(Scalar(1), g_scale / Scalar(10)));
  V s, u;
  if (mB) {
    s = (qp.ineq * x - qp.ineq_rhs).cwiseMax(Scalar(1));
    u = V::Constant(mB, std::max(Scalar(1), g_scale / Scalar(10)));
  }
  V y = V::Zero(mC);

  struct Snapshot {
    V x, s, y, u, z;
    Scalar res;
    int iter;
  };
  Snapshot best{x, s, y, u, z, std::numeric_limits<Scalar>::max(), 0};

  const Scalar delta0 = Scalar(1e-10) * (Scalar(1) + qp.hessian.trace() / Scalar(nx));
  Eigen::LLT<M> llt(nx);
  M normal(nx, nx), W;
  Eigen::LDLT<M> schur_ldlt;

  SubsolverStatus status = SubsolverStatus::ok;
  int it = 0, stall = 0, infeasible_streak = 0;
  Scalar mu_prev = std::numeric_limits<Scalar>::max();
  Scalar feas_prev = std::numeric_limits<Scalar>::max();

  for (it = 0; it < opt.max_iterations; ++it) {
    // residuals of the perturbed KKT system
    V hx = qp.hessian * x;
    V rd = hx + qp.linear - z;  // want 0
    if (mC) rd.noalias() -= qp.eq.transpose() * y;
    if (mB) rd.noalias() -= qp.ineq.transpose() * u;
    V rE = mC ? V(qp.eq * x - qp.eq_rhs) : V();
    V rB = mB ? V(qp.ineq * x - s - qp.ineq_rhs) : V();
    const Scalar mu = (x.dot(z) + (mB ? s.dot(u) : Scalar(0))) / Scalar(nx + mB);

    const Scalar stat_den = g_scale + hx.template lpNorm<Eigen::Infinity>();
    Scalar feas = 0, feas_den = rhs_scale;
    if (mC) {
      feas = std::max(feas, rE.template lpNorm<Eigen::Infinity>());
      feas_den = std::max(feas_den, (qp.eq * x).template lpNorm<Eigen::Infinity>());
    }
    if (mB) {
      feas = std::max(feas, rB.template lpNorm<Eigen::Infinity>());
      feas_den = std::max(feas_den, (qp.ineq * x).template lpNorm<Eigen::Infinity>());
    }
    const Scalar res = std::max({rd.template lpNorm<Eigen::Infinity>() / stat_den,
                                 feas / feas_den, mu / g_scale});

    if (res < best.res) {
      best = Snapshot{x, s, y, u, z, res, it};
      stall = 0;
    } else if (++stall >= 8) {
      break;  // no measurable progress in 8 rounds, return the best iterate
    }
    if (res <= opt.floor) break;

    // builders never produce infeasible subproblems, so this is a defect alarm:
    // primal residual stalled above 1e-6 while complementarity keeps shrinking
    if (feas > Scalar(1e-6) * feas_den && feas >= Scalar(0.99) * feas_prev && mu < mu_prev) {
      if (++infeasible_streak >= 10) {
        status = SubsolverStatus::infeasible;
        break;
      }
    } else {
      infeasible_streak = 0;
    }
    mu_prev = mu;
    feas_prev = feas;

    // normal matrix M = H + X⁻¹Z + BᵀS⁻¹UB, δ·I retries for the PSD null space
    const V d1 = (z.array() / x.array()).min(Scalar(1e18)).matrix();
    normal = qp.hessian;
    normal.diagonal() += d1;
    V d2;
    if (mB) {
      d2 = (u.array() / s.array()).min(Scalar(1e18)).matrix();
      normal.noalias() += qp.ineq.transpose() * d2.asDiagonal() * qp.ineq;
    }
    bool factored = false;
    for (int retry = 0; retry < 4; ++retry) {
      const Scalar delta = retry == 0 ? Scalar(0) : delta0 * Scalar(1 << (retry - 1));
      if (delta > Scalar(0)) normal.diagonal().array() += delta;
      llt.compute(normal);
      if (llt.info() == Eigen::Success) {
        factored = true;
        break;
      }
    }
    if (!factored) {
      status = SubsolverStatus::factorization_failure;
      break;
    }
    if (mC) {
      W = llt.solve(qp.eq.transpose());  // nx × mC
      schur_ldlt.compute(qp.eq * W);
    }

    auto newton = [&](const V& rcx, const V& rcs, V& dx, V& dy, V& du, V& dz, V& ds) {
      V rhs1 = -rd + (rcx.array() / x.array()).matrix();
      if (mB)
        rhs1.noalias() +=
            qp.ineq.transpose() * (((-u.array() * rB.array() + rcs.array()) / s.array()).matrix());
      V dx0 = llt.solve(rhs1);
      if (mC) {
        dy = schur_ldlt.solve(-rE - qp.eq * dx0);
        dx = dx0 + W * dy;
      } else {
        dy.resize(0);
        dx = std::move(dx0);
      }
      dz = ((rcx.array() - z.array() * dx.array()) / x.array()).matrix();
      if (mB) {
        ds = qp.ineq * dx + rB;
        du = ((rcs.array() - u.array() * ds.array()) / s.array()).matrix();
      }
    };

    // predictor (affine scaling)
    V rcx = -(x.array() * z.array()).matrix();
    V rcs = mB ? V(-(s.array() * u.array()).matrix()) : V();
    V dx, dy, du, dz, ds;
    newton(rcx, rcs, dx, dy, du, dz, ds);
    Scalar ap = detail::max_step(x, dx), ad = detail::max_step(z, dz);
    if (mB) {
      ap = std::min(ap, detail::max_step(s, ds));
      ad = std::min(ad, detail::max_step(u, du));
    }
    Scalar mu_aff = (x + ap * dx).dot(z + ad * dz);
    if (mB) mu_aff += (s + ap * ds).dot(u + ad * du);
    mu_aff /= Scalar(nx + mB);
    const Scalar ratio = mu > Scalar(0) ? mu_aff / mu : Scalar(0);
    const Scalar sigma = std::clamp(ratio * ratio * ratio, Scalar(0), Scalar(1));

    // corrector with centering σμ and the second-order term
    rcx.array() += -dx.array() * dz.array() + sigma * mu;
    if (mB) rcs.array() += -ds.array() * du.array() + sigma * mu;
    newton(rcx, rcs, dx, dy, du, dz, ds);

    ap = detail::max_step(x, dx), ad = detail::max_step(z, dz);
    if (mB) {
      ap = std::min(ap, detail::max_step(s, ds));
      ad = std::min(ad, detail::max_step(u, du));
    }
    const Scalar eta = mu <= Scalar(1e-6) * g_scale ? Scalar(0.99995) : Scalar(0.995);
    ap = std::min(Scalar(1), eta * ap);
    ad = std::min(Scalar(1), eta * ad);

    x += ap * dx;
    z += ad * dz;
    if (mB) {
      s += ap * ds;
      u += ad * du;
    }
    if (mC) y += ad * dy;
    x = x.cwiseMax(Scalar(1e-300));
    z = z.cwiseMax(Scalar(1e-300));
    if (mB) {
      s = s.cwiseMax(Scalar(1e-300));
      u = u.cwiseMax(Scalar(1e-300));
    }
  }

  SubsolverReport<Scalar> rep;
  rep.iterations = best.iter;
  rep.kkt_residual = best.res;
  rep.primal = best.x.cwiseMax(Scalar(0));
  rep.bound_dual = best.z;
  rep.ineq_dual = mB ? best.u : V();
  rep.eq_dual = mC ? best.y : V();

  // An interior-point endgame leaves μ-level dust on inactive coordinates.
  // Snap coordinates that are clearly dual-active to exact zero so support
  // counting at ε_x is meaningful; the summed perturbation stays ≪ ε_p.
  const Scalar snap = Scalar(1e-11) * (Scalar(1) + rep.primal.template lpNorm<Eigen::Infinity>());
  for (Index i = 0; i < nx; ++i)
    if (rep.primal[i] <= snap && rep.bound_dual[i] >= rep.primal[i]) rep.primal[i] = Scalar(0);

  if (status == SubsolverStatus::ok) detail::crossover(qp, rep, g_scale);
  if (rep.kkt_residual <= opt.tol) {
    rep.status = SubsolverStatus::ok;
  } else {
    rep.status = status == SubsolverStatus::ok ? SubsolverStatus::max_iterations : status;
  }

  rep.objective = qp.objective(rep.primal);
  return rep;
}

}  // namespace nnq
