#include "doctest.h"
#include "test_helpers.hpp"

using namespace nnq;
using test_util::problem_from_factor;
using test_util::random_dense_problem;
using test_util::random_matrix;
using test_util::random_vector;

TEST_CASE("default tau follows ceil(4 ln^2 nu)") {
  CHECK(default_tau(1000) == 191);
  CHECK(default_tau(2) >= 1);
  CHECK(default_tau(3) == static_cast<Index>(std::ceil(4 * std::log(3.0) * std::log(3.0))));
}

TEST_CASE("select_candidates filters by sign and sorts by value then index") {
  VectorX<double> v(3);
  v << -3, -1, 2;
  CHECK(select_candidates(v, IndexList{0, 1, 2}, 1e-9) == IndexList{0, 1});

  VectorX<double> pos(3);
  pos << 0.5, 0.0, 2.0;
  CHECK(select_candidates(pos, IndexList{0, 1, 2}, 1e-9).empty());

  VectorX<double> tie(3);
  tie << -2, -2, -5;
  CHECK(select_candidates(tie, IndexList{0, 1, 2}, 1e-9) == IndexList{2, 0, 1});

  // only entries inside the active set are eligible
  CHECK(select_candidates(tie, IndexList{1}, 1e-9) == IndexList{1});
}

TEST_CASE("next_active_set branch selection and set algebra") {
  ActiveSetState<double> state;
  state.primal = VectorX<double>::Zero(6);
  state.primal[3] = 1.0;
  state.primal[4] = 0.5;
  state.refresh_support(1e-10);
  state.active_set = IndexList{0, 1, 2};
  state.iter = 1;

  DriverConfig<double> shrink_cfg;
  shrink_cfg.tau = 2;
  shrink_cfg.beta0 = 5;
  auto [after_shrink, b1] = next_active_set(state, IndexList{0, 1, 2}, shrink_cfg);
  CHECK(b1 == Branch::shrink);
  CHECK(after_shrink.empty());

  DriverConfig<double> rebuild_cfg;
  rebuild_cfg.tau = 2;
  rebuild_cfg.beta0 = 3;
  auto [after_rebuild, b2] = next_active_set(state, IndexList{0, 1, 2}, rebuild_cfg);
  CHECK(b2 == Branch::rebuild);
  // keep free: supp = {3,4} plus the first τ=2 candidates {0,1} → active {2,5}
  CHECK(after_rebuild == IndexList{2, 5});

  // past β1 the shrink branch wins regardless of |E_r|
  state.iter = 16;
  auto [after_cap, b3] = next_active_set(state, IndexList{0, 1, 2}, rebuild_cfg);
  CHECK(b3 == Branch::shrink);
  CHECK(after_cap.empty());
}

TEST_CASE("an immediately optimal instance converges in one iteration") {
  // MEB of {0,1} with S_1 = ∅: the first subsolve is the full problem
  MatrixX<double> Q(2, 2);
  Q << 0, 0, 0, 1;
  VectorX<double> a(2);
  a << 0, -1;
  Problem<double> p = make_unconstrained(GramMatrix<double>(std::move(Q)), std::move(a), Family::meb);
  std::vector<Triplet<double>> trip{{0, 0, 1.0}, {0, 1, 1.0}};
  p.eq_matrix.resize(1, 2);
  p.eq_matrix.setFromTriplets(trip.begin(), trip.end());
  p.eq_rhs = VectorX<double>::Constant(1, 1.0);

  SolveResult<double> r = solve(p, IndexList{}, DriverConfig<double>{});
  CHECK(r.status == SolveStatus::converged);
  CHECK(r.iterations == 1);
  CHECK(r.primal[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.objective == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("random least-squares instance reaches the full-solve objective") {
  const Index nu = 12;
  Problem<double> p = problem_from_factor(random_matrix(8, nu, 7), random_vector(8, 8));

  DriverConfig<double> cfg;
  cfg.tau = 2;
  cfg.beta0 = 6;
  SolveResult<double> got = solve(p, init_random_subset(nu, 6, 9), cfg);
  CHECK((got.status == SolveStatus::converged ||
         got.status == SolveStatus::beta1_fallback_converged));

  SolveResult<double> star = full_oracle(p);
  CHECK(std::abs(got.objective - star.objective) <= 1e-7 * (1 + std::abs(star.objective)));
}

TEST_CASE("trace invariants: monotone objective, branch bookkeeping, disjoint rebuilds") {
  const Index nu = 40;
  Problem<double> p = problem_from_factor(random_matrix(25, nu, 17), random_vector(25, 18));

  DriverConfig<double> cfg;
  cfg.tau = 3;
  cfg.beta0 = 4;  // small threshold so rebuilds actually happen
  cfg.record_iterates = true;
  SolveResult<double> r = solve(p, init_random_subset(nu, 8, 19), cfg);
  REQUIRE((r.status == SolveStatus::converged ||
           r.status == SolveStatus::beta1_fallback_converged));
  REQUIRE(r.trace.records.size() >= 1);

  for (std::size_t i = 0; i + 1 < r.trace.records.size(); ++i) {
    const auto& rec = r.trace.records[i];
    CHECK(r.trace.records[i + 1].objective <=
          rec.objective + 1e-9 * (1 + std::abs(rec.objective)));
    if (rec.branch == Branch::rebuild) {
      // next active set misses supp(x_r) and the first τ candidates
      const IndexList& next_active = r.trace.active_sets[i + 1];
      std::vector<char> active_flag(nu, 0);
      for (Index idx : next_active) active_flag[idx] = 1;
      const IndexList support = support_of(r.trace.iterates[i], 1e-10);
      for (Index idx : support) CHECK(!active_flag[idx]);
      const IndexList& cand = r.trace.candidate_sets[i];
      const Index take = std::min<Index>(r.trace.tau, static_cast<Index>(cand.size()));
      for (Index k = 0; k < take; ++k) CHECK(!active_flag[cand[k]]);
    }
  }
}

TEST_CASE("past beta1 the active set shrinks strictly until convergence") {
  const Index nu = 30;
  Problem<double> p = problem_from_factor(random_matrix(18, nu, 27), random_vector(18, 28));

  DriverConfig<double> cfg;
  cfg.beta1 = 1;  // enter the fallback regime immediately
  cfg.tau = 2;
  cfg.beta0 = 3;
  cfg.record_iterates = true;
  SolveResult<double> r = solve(p, init_random_subset(nu, 4, 29), cfg);
  REQUIRE((r.status == SolveStatus::converged ||
           r.status == SolveStatus::beta1_fallback_converged));
  if (r.iterations > 2) CHECK(r.status == SolveStatus::beta1_fallback_converged);

  for (std::size_t i = 0; i + 1 < r.trace.active_sets.size(); ++i) {
    const auto& rec = r.trace.records[i];
    if (rec.r > 1 && rec.candidates > 0)
      CHECK(r.trace.active_sets[i + 1].size() < r.trace.active_sets[i].size());
  }
}

TEST_CASE("hard iteration cap stops a run that still has candidates") {
  const Index nu = 25;
  Problem<double> p = problem_from_factor(random_matrix(15, nu, 37), random_vector(15, 38));
  DriverConfig<double> cfg;
  cfg.hard_iteration_cap = 1;
  SolveResult<double> r = solve(p, init_random_subset(nu, 3, 39), cfg);
  // either the first subsolve was already optimal or the cap fired
  if (!(r.iterations == 1 && r.status == SolveStatus::converged)) {
    CHECK(r.status == SolveStatus::iteration_cap);
    CHECK(r.iterations == 1);
  }
}

TEST_CASE("solves are deterministic for fixed seeds") {
  const Index nu = 20;
  Problem<double> p = problem_from_factor(random_matrix(14, nu, 47), random_vector(14, 48));
  DriverConfig<double> cfg;
  cfg.record_trace = true;
  IndexList init = init_random_subset(nu, 5, 49);
  SolveResult<double> first = solve(p, init, cfg);
  SolveResult<double> second = solve(p, init, cfg);
  CHECK(first.objective == second.objective);
  CHECK(first.iterations == second.iterations);
  REQUIRE(first.trace.records.size() == second.trace.records.size());
  for (std::size_t i = 0; i < first.trace.records.size(); ++i)
    CHECK(first.trace.records[i].objective == second.trace.records[i].objective);
}

TEST_CASE("driver config validation") {
  DriverConfig<double> cfg;
  cfg.tau = 5;
  cfg.beta0 = 5;  // must exceed tau
  CHECK_THROWS(cfg.resolved(100));
  cfg.beta0 = 6;
  CHECK(cfg.resolved(100).beta0 == 6);
  DriverConfig<double> defaults;
  const DriverConfig<double> r = defaults.resolved(1000);
  CHECK(r.tau == 191);
  CHECK(r.beta0 == 3 * 191);
  CHECK(r.hard_iteration_cap == 1000);
}
