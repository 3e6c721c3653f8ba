#pragma once

#include "nnq/active_set.hpp"
#include "nnq/subsolver.hpp"

#include <cmath>
#include <numeric>

namespace nnq {

enum class Branch { none, shrink, rebuild };
enum class SolveStatus { converged, beta1_fallback_converged, subsolver_failure, iteration_cap };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::shrink: return "shrink";
    case Branch::rebuild: return "rebuild";
    default: return "none";
  }
}

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::beta1_fallback_converged: return "beta1-fallback-converged";
    case SolveStatus::subsolver_failure: return "subsolver-failure";
    default: return "iteration-cap";
  }
}

// τ = ⌈4 ln²ν⌉; the paper's 4 ln²ν rounded up so index counts stay integral.
inline Index default_tau(Index nu) {
  const double l = std::log(static_cast<double>(nu));
  return std::max<Index>(1, static_cast<Index>(std::ceil(4.0 * l * l)));
}

template <typename Scalar>
struct DriverConfig {
  Index tau = 0;                 // 0 → ⌈4 ln²ν⌉
  Index beta0 = 0;               // 0 → 3·tau
  Index beta1 = 15;
  Index hard_iteration_cap = 0;  // 0 → ν; counts completed subsolves
  Tolerances<Scalar> tol;
  bool record_trace = false;
  bool record_iterates = false;  // keep x_r, v_r, E_r, S_r snapshots for diagnostics

  // Resolve the ν-dependent defaults and validate β0 > τ ≥ 1, β1 ≥ 1.
  DriverConfig resolved(Index nu) const {
    DriverConfig c = *this;
    if (c.tau <= 0) c.tau = default_tau(nu);
    if (c.beta0 <= 0) c.beta0 = 3 * c.tau;
    if (c.hard_iteration_cap <= 0) c.hard_iteration_cap = nu;
    require(c.tau >= 1, "DriverConfig: tau must be >= 1");
    require(c.beta0 > c.tau, "DriverConfig: beta0 must exceed tau");
    require(c.beta1 >= 1, "DriverConfig: beta1 must be >= 1");
    return c;
  }
};

template <typename Scalar>
struct IterationRecord {
  int r = 0;
  Scalar objective = 0;       // f(x_r)
  Index candidates = 0;       // |E_r|
  Index support_size = 0;     // |supp(x_r)|
  Index active_size = 0;      // |S_r|
  Branch branch = Branch::none;
  Scalar step_norm = 0;       // ‖x_{r+1} − x_r‖
  int subsolver_iterations = 0;
  Scalar kkt_residual = 0;
  // slots filled post-hoc by the diagnostics module (NaN = not computed)
  Scalar gap_ratio, move_ratio, cosine_ratio;
  bool lambda_ok = false, excluded = false;

  IterationRecord() {
    const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
    gap_ratio = move_ratio = cosine_ratio = nan;
  }
};

template <typename Scalar>
struct SolveTrace {
  std::vector<IterationRecord<Scalar>> records;
  // populated only when record_iterates is set
  std::vector<VectorX<Scalar>> iterates;       // x_r
  std::vector<VectorX<Scalar>> reduced_costs;  // v_r
  std::vector<IndexList> candidate_sets;       // E_r (sorted by ascending v)
  std::vector<IndexList> active_sets;          // S_r
  Index tau = 0;                               // resolved value used by the run
};

template <typename Scalar>
struct SolveResult {
  VectorX<Scalar> primal;
  DualCertificate<Scalar> certificate;
  Scalar objective = 0;
  SolveTrace<Scalar> trace;
  SolveStatus status = SolveStatus::converged;
  int iterations = 0;  // completed subsolves
};

// E_r: active indices with v_i < −tol, sorted ascending by v_i, ties by index.
template <typename Scalar>
IndexList select_candidates(const VectorX<Scalar>& v, const IndexList& active_set, Scalar tol) {
  std::vector<std::pair<Scalar, Index>> neg;
  for (Index i : active_set)
    if (v[i] < -tol) neg.emplace_back(v[i], i);
  std::sort(neg.begin(), neg.end());
  IndexList out;
  out.reserve(neg.size());
  for (auto& [val, i] : neg) out.push_back(i);
  return out;
}

// Shrink when |E_r| < β0 or r > β1: S_{r+1} = S_r \ E_r.
// Otherwise rebuild around the best τ candidates: S_{r+1} = [ν] \ (supp(x_r) ∪ E'_r),
// which also kicks every zero free variable back into the active set.
template <typename Scalar>
std::pair<IndexList, Branch> next_active_set(const ActiveSetState<Scalar>& state,
                                             const IndexList& candidates,
                                             const DriverConfig<Scalar>& config) {
  require(!candidates.empty(), "next_active_set: empty candidate list");
  const Index nu = state.primal.size();
  const DriverConfig<Scalar> cfg = config.resolved(nu);
  const Index card = static_cast<Index>(candidates.size());

  if (card < cfg.beta0 || state.iter > cfg.beta1) {
    std::vector<char> drop(static_cast<std::size_t>(nu), 0);
    for (Index i : candidates) drop[i] = 1;
    IndexList next;
    next.reserve(state.active_set.size());
    for (Index i : state.active_set)
      if (!drop[i]) next.push_back(i);
    return {std::move(next), Branch::shrink};
  }

  std::vector<char> keep_free(static_cast<std::size_t>(nu), 0);
  for (Index i : state.support) keep_free[i] = 1;
  const Index take = std::min(cfg.tau, card);
  for (Index k = 0; k < take; ++k) keep_free[candidates[k]] = 1;
  IndexList next;
  for (Index i = 0; i < nu; ++i)
    if (!keep_free[i]) next.push_back(i);
  return {std::move(next), Branch::rebuild};
}

// Algorithm: repeat { subsolve constrained by S_r; recover v_r; E_r = negative
// entries of v_r on S_r; stop when E_r = ∅; otherwise update S under the β0/β1
// policy }. The initial active set comes from a family initializer.
template <typename Scalar>
SolveResult<Scalar> solve(const Problem<Scalar>& problem, const IndexList& initial_active_set,
                          const DriverConfig<Scalar>& config = {}) {
  const Index nu = problem.dim;
  const DriverConfig<Scalar> cfg = config.resolved(nu);
  const Scalar eps_v =
      cfg.tol.reduced_cost * (Scalar(1) + problem.linear.template lpNorm<Eigen::Infinity>());

  SolveResult<Scalar> result;
  result.trace.tau = cfg.tau;

  ActiveSetState<Scalar> state;
  state.active_set = sorted_unique(initial_active_set);
  state.iter = 1;

  // initial subsolve constrained by S_1
  ReducedQp<Scalar> qp = extract_subproblem(problem, state.active_set);
  SubsolverReport<Scalar> rep = solve_reduced<Scalar>(qp);
  if (rep.status != SubsolverStatus::ok) {
    result.status = SolveStatus::subsolver_failure;
    result.primal = scatter(qp.free, rep.primal, nu);
    result.objective = objective(problem, result.primal);
    return result;
  }
  state.primal = scatter(qp.free, rep.primal, nu);
  state.refresh_support(cfg.tol.support);

  bool entered_beta1_regime = false;
  SolveStatus status = SolveStatus::converged;

  while (true) {
    VectorX<Scalar> v = recover_reduced_cost(problem, state.primal, rep.ineq_dual, rep.eq_dual);
    IndexList candidates = select_candidates(v, state.active_set, eps_v);

    IterationRecord<Scalar> rec;
    rec.r = state.iter;
    rec.objective = objective(problem, state.primal);
    rec.candidates = static_cast<Index>(candidates.size());
    rec.support_size = static_cast<Index>(state.support.size());
    rec.active_size = static_cast<Index>(state.active_set.size());
    rec.subsolver_iterations = rep.iterations;
    rec.kkt_residual = rep.kkt_residual;
    if (cfg.record_iterates) {
      result.trace.iterates.push_back(state.primal);
      result.trace.reduced_costs.push_back(v);
      result.trace.candidate_sets.push_back(candidates);
      result.trace.active_sets.push_back(state.active_set);
    }

    if (candidates.empty()) {
      if (cfg.record_trace || cfg.record_iterates) result.trace.records.push_back(rec);
      result.certificate = DualCertificate<Scalar>{rep.ineq_dual, rep.eq_dual, std::move(v)};
      status = entered_beta1_regime ? SolveStatus::beta1_fallback_converged : SolveStatus::converged;
      break;
    }
    if (state.iter >= cfg.hard_iteration_cap) {
      if (cfg.record_trace || cfg.record_iterates) result.trace.records.push_back(rec);
      result.certificate = DualCertificate<Scalar>{rep.ineq_dual, rep.eq_dual, std::move(v)};
      status = SolveStatus::iteration_cap;
      break;
    }

    auto [next_set, branch] = next_active_set(state, candidates, cfg);
    rec.branch = branch;
    if (state.iter > cfg.beta1) entered_beta1_regime = true;

    qp = extract_subproblem(problem, next_set);
    VectorX<Scalar> warm = restrict_to(qp.free, state.primal);
    rep = solve_reduced<Scalar>(qp, std::move(warm));
    if (rep.status != SubsolverStatus::ok) {
      if (cfg.record_trace || cfg.record_iterates) result.trace.records.push_back(rec);
      result.certificate = DualCertificate<Scalar>{rep.ineq_dual, rep.eq_dual, std::move(v)};
      status = SolveStatus::subsolver_failure;
      break;
    }
    VectorX<Scalar> next_primal = scatter(qp.free, rep.primal, nu);
    rec.step_norm = (next_primal - state.primal).norm();
    if (cfg.record_trace || cfg.record_iterates) result.trace.records.push_back(rec);

    state.active_set = std::move(next_set);
    state.primal = std::move(next_primal);
    state.iter += 1;
    state.refresh_support(cfg.tol.support);
  }

  result.primal = state.primal;
  result.objective = objective(problem, state.primal);
  result.status = status;
  result.iterations = state.iter;
  return result;
}

}  // namespace nnq
