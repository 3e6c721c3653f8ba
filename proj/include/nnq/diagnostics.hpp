#pragma once

#include "nnq/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace nnq {

// Reference solution from a single subsolve of the FULL problem (every
// coordinate free). Dense factorization, so gated to desk scale.
inline constexpr Index kFullOracleDimCap = 3000;

template <typename Scalar>
SolveResult<Scalar> full_oracle(const Problem<Scalar>& problem,
                                const SubsolverOptions<Scalar>& options = {}) {
  require(problem.dim <= kFullOracleDimCap,
          "full_oracle: problem dimension exceeds the dense-solve cap");
  ReducedQp<Scalar> qp = extract_subproblem(problem, IndexList{});
  SubsolverReport<Scalar> rep = solve_reduced<Scalar>(qp, std::nullopt, options);

  SolveResult<Scalar> result;
  result.primal = scatter(qp.free, rep.primal, problem.dim);
  result.certificate.ineq_dual = rep.ineq_dual;
  result.certificate.eq_dual = rep.eq_dual;
  result.certificate.reduced_cost =
      recover_reduced_cost(problem, result.primal, rep.ineq_dual, rep.eq_dual);
  result.objective = objective(problem, result.primal);
  result.iterations = 1;
  result.status = rep.status == SubsolverStatus::ok ? SolveStatus::converged
                                                    : SolveStatus::subsolver_failure;
  return result;
}

// f(x_r) − f(y), for y the exact minimizer of f along the unit ray from x_r
// through x_next clipped to the feasible segment, must land between
// −½‖x_r−y‖⟨∇f(x_r), n⟩ and −‖x_r−y‖⟨∇f(x_r), n⟩. Always true for a convex
// quadratic; a violation beyond slack means the iterate pair is corrupted.
template <typename Scalar>
struct SandwichReport {
  bool passed = true;
  Scalar decrease = 0;     // f(x_r) − f(y)
  Scalar upper_bound = 0;  // −‖x_r−y‖⟨∇f(x_r), n⟩
  Scalar lower_bound = 0;  // half of upper_bound
  Scalar step = 0;         // ‖y − x_r‖
  Scalar slack = 0;
};

template <typename Scalar>
SandwichReport<Scalar> check_descent_sandwich(const Problem<Scalar>& problem,
                                              const VectorX<Scalar>& x_r,
                                              const VectorX<Scalar>& x_next) {
  SandwichReport<Scalar> rep;
  const Scalar fr = objective(problem, x_r);
  rep.slack = Scalar(1e-8) * (1 + std::abs(fr));

  VectorX<Scalar> dir = x_next - x_r;
  const Scalar len = dir.norm();
  if (len == Scalar(0)) return rep;  // no move, both sides 0
  dir /= len;

  const VectorX<Scalar> grad = gradient(problem, x_r);
  const Scalar slope = grad.dot(dir);
  const Scalar curvature = problem.gram.quad(dir);  // nᵀQn ≥ 0

  // feasible segment endpoint: largest t with x_r + t·n ≥ 0 and B(x_r+tn) ≥ b
  Scalar t_max = std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < problem.dim; ++i)
    if (dir[i] < Scalar(0)) t_max = std::min(t_max, std::max(Scalar(0), x_r[i]) / -dir[i]);
  if (problem.n_ineq() > 0) {
    const VectorX<Scalar> slack_now = problem.ineq_matrix * x_r - problem.ineq_rhs;
    const VectorX<Scalar> slope_b = problem.ineq_matrix * dir;
    for (Index j = 0; j < problem.n_ineq(); ++j)
      if (slope_b[j] < Scalar(0))
        t_max = std::min(t_max, std::max(Scalar(0), slack_now[j]) / -slope_b[j]);
  }

  Scalar t;
  if (curvature > Scalar(0))
    t = std::max(Scalar(0), -slope / (2 * curvature));
  else
    t = slope < Scalar(0) ? t_max : Scalar(0);
  if (std::isfinite(t_max)) t = std::min(t, t_max);

  const VectorX<Scalar> y = x_r + t * dir;
  rep.step = t;
  rep.decrease = fr - objective(problem, y);
  rep.upper_bound = -t * slope;
  rep.lower_bound = rep.upper_bound / 2;
  rep.passed = rep.decrease <= rep.upper_bound + rep.slack &&
               rep.decrease >= rep.lower_bound - rep.slack;
  return rep;
}

// The normalized restriction of −v to the first min(τ, |E|) entries of E makes
// an angle with −v restricted to all of E whose cosine is at least
// √(α / (2 ln ν)), α = min(1, τ/|E|). The restriction maximizes the cosine
// over unit vectors supported there, so it dominates any conical witness.
template <typename Scalar>
struct CosineReport {
  bool passed = true;
  Scalar cosine = 1;
  Scalar bound = 0;
  Scalar alpha = 1;
};

template <typename Scalar>
CosineReport<Scalar> check_cosine_bound(const VectorX<Scalar>& v, const IndexList& candidates,
                                        Index tau, Index nu) {
  require(nu >= 2, "check_cosine_bound: need nu >= 2");
  require(!candidates.empty(), "check_cosine_bound: empty candidate set");
  require(tau >= 1, "check_cosine_bound: tau must be >= 1");

  const Index total = static_cast<Index>(candidates.size());
  const Index take = std::min(tau, total);
  Scalar sum_selected = 0, sum_all = 0;
  for (Index k = 0; k < total; ++k) {
    const Scalar w = v[candidates[static_cast<std::size_t>(k)]];
    sum_all += w * w;
    if (k < take) sum_selected += w * w;
  }
  CosineReport<Scalar> rep;
  rep.alpha = std::min(Scalar(1), Scalar(tau) / Scalar(total));
  rep.bound = std::sqrt(rep.alpha / (2 * std::log(Scalar(nu))));
  rep.cosine = sum_all > Scalar(0)
                   ? std::clamp(std::sqrt(sum_selected / sum_all), Scalar(0), Scalar(1))
                   : Scalar(1);
  rep.passed = rep.cosine >= rep.bound - Scalar(1e-12);
  return rep;
}

template <typename Scalar>
struct RatioAggregate {
  Scalar mean = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar median = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar max = std::numeric_limits<Scalar>::quiet_NaN();
  Index count = 0;
};

// Per-transition convergence ratios against the oracle optimum. Transitions
// where f(x_r) already sits on f* (within 1e-12 relative) are excluded.
template <typename Scalar>
struct ConvergenceReport {
  std::vector<Scalar> gap_ratio;     // (f(x_{r+1})−f*)/(f(x_r)−f*)
  std::vector<Scalar> move_ratio;    // ‖x_{r+1}−x_r‖/‖x*−x_r‖
  std::vector<Scalar> cosine_ratio;  // cos∠(v_r, x_{r+1}−x_r)/cos∠(v_r, x*−x_r)
  std::vector<bool> lambda_ok;       // move_ratio ≥ 1/λ
  std::vector<bool> excluded;
  RatioAggregate<Scalar> gap, move, cosine;
  Scalar lambda = 10;
  Scalar lambda_fraction = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar f_star = 0;
};

namespace detail {

template <typename Scalar>
RatioAggregate<Scalar> aggregate(std::vector<Scalar> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](Scalar v) { return !std::isfinite(v); }),
               values.end());
  RatioAggregate<Scalar> agg;
  agg.count = static_cast<Index>(values.size());
  if (values.empty()) return agg;
  agg.mean = std::accumulate(values.begin(), values.end(), Scalar(0)) / Scalar(values.size());
  agg.max = *std::max_element(values.begin(), values.end());
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  agg.median = values.size() % 2 == 1 ? values[m] : (values[m - 1] + values[m]) / 2;
  return agg;
}

template <typename Scalar>
Scalar clamped_cosine(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  const Scalar den = a.norm() * b.norm();
  if (den == Scalar(0)) return std::numeric_limits<Scalar>::quiet_NaN();
  return std::clamp(a.dot(b) / den, Scalar(-1), Scalar(1));
}

}  // namespace detail

// Fills the diagnostic slots of trace.records in place and returns the
// aggregate view. Needs the trace recorded with record_iterates.
template <typename Scalar, typename Derived>
ConvergenceReport<Scalar> convergence_report(SolveTrace<Scalar>& trace,
                                             const Eigen::MatrixBase<Derived>& x_star,
                                             Scalar f_star, Scalar lambda = Scalar(10)) {
  ConvergenceReport<Scalar> report;
  report.lambda = lambda;
  report.f_star = f_star;
  const std::size_t iterates = trace.iterates.size();
  if (iterates < 2) return report;  // no transition to measure
  require(trace.records.size() >= iterates,
          "convergence_report: records and iterates out of step");

  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar floor = Scalar(1e-12) * (1 + std::abs(f_star));
  Index lambda_hits = 0, lambda_total = 0;
  for (std::size_t r = 0; r + 1 < iterates; ++r) {
    auto& rec = trace.records[r];
    const Scalar gap_now = rec.objective - f_star;
    const bool skip = gap_now <= floor;
    rec.excluded = skip;
    report.excluded.push_back(skip);
    if (skip) {
      report.gap_ratio.push_back(nan);
      report.move_ratio.push_back(nan);
      report.cosine_ratio.push_back(nan);
      report.lambda_ok.push_back(false);
      continue;
    }
    const VectorX<Scalar>& x_r = trace.iterates[r];
    const VectorX<Scalar>& x_next = trace.iterates[r + 1];
    const Scalar gap_next = trace.records[r + 1].objective - f_star;

    const Scalar gap_ratio = std::max(Scalar(0), gap_next) / gap_now;
    const Scalar dist_star = (x_star - x_r).norm();
    const Scalar move = (x_next - x_r).norm();
    const Scalar move_ratio = dist_star > Scalar(0) ? move / dist_star : nan;

    Scalar cosine_ratio = nan;
    if (r < trace.reduced_costs.size()) {
      const Scalar num = detail::clamped_cosine(trace.reduced_costs[r], VectorX<Scalar>(x_next - x_r));
      const Scalar den = detail::clamped_cosine(trace.reduced_costs[r], VectorX<Scalar>(x_star - x_r));
      if (std::isfinite(num) && std::isfinite(den) && den != Scalar(0)) cosine_ratio = num / den;
    }

    const bool ok_lambda = std::isfinite(move_ratio) && move_ratio >= 1 / lambda;
    report.gap_ratio.push_back(gap_ratio);
    report.move_ratio.push_back(move_ratio);
    report.cosine_ratio.push_back(cosine_ratio);
    report.lambda_ok.push_back(ok_lambda);
    if (std::isfinite(move_ratio)) {
      ++lambda_total;
      if (ok_lambda) ++lambda_hits;
    }

    rec.gap_ratio = gap_ratio;
    rec.move_ratio = move_ratio;
    rec.cosine_ratio = cosine_ratio;
    rec.lambda_ok = ok_lambda;
  }
  report.gap = detail::aggregate(report.gap_ratio);
  report.move = detail::aggregate(report.move_ratio);
  report.cosine = detail::aggregate(report.cosine_ratio);
  if (lambda_total > 0) report.lambda_fraction = Scalar(lambda_hits) / Scalar(lambda_total);
  return report;
}

// One row per completed subsolve; NaN in the ratio columns means not computed
// (no oracle, excluded, or final iteration).
template <typename Scalar>
void write_trace_csv(std::ostream& out, const SolveTrace<Scalar>& trace) {
  out << "r,objective,candidates,support,active,branch,step_norm,subsolver_iterations,"
         "kkt_residual,gap_ratio,move_ratio,cosine_ratio,lambda_ok\n";
  out.precision(17);
  for (const auto& rec : trace.records) {
    out << rec.r << ',' << rec.objective << ',' << rec.candidates << ',' << rec.support_size
        << ',' << rec.active_size << ',';
    switch (rec.branch) {
      case Branch::shrink: out << "shrink"; break;
      case Branch::rebuild: out << "rebuild"; break;
      default: out << "none"; break;
    }
    out << ',' << rec.step_norm << ',' << rec.subsolver_iterations << ',' << rec.kkt_residual
        << ',' << rec.gap_ratio << ',' << rec.move_ratio << ',' << rec.cosine_ratio << ','
        << (rec.lambda_ok ? 1 : 0) << '\n';
  }
}

}  // namespace nnq
