#include "doctest.h"
#include "test_helpers.hpp"

using namespace nnq;
using test_util::enumerate_qp;
using test_util::random_dense_problem;
using test_util::random_five_var_qp;
using test_util::random_vector;

namespace {

ReducedQp<double> scalar_qp(double h, double g) {
  ReducedQp<double> qp;
  qp.free = {0};
  qp.hessian = MatrixX<double>::Constant(1, 1, h);
  qp.linear = VectorX<double>::Constant(1, g);
  qp.ineq.resize(0, 1);
  qp.ineq_rhs.resize(0);
  qp.eq.resize(0, 1);
  qp.eq_rhs.resize(0);
  return qp;
}

// Lagrangian of ½xᵀHx + gᵀx with multipliers (u, ũ, z) at the returned point.
double lagrangian_value(const ReducedQp<double>& qp, const SubsolverReport<double>& rep) {
  double val = qp.objective(rep.primal);
  if (qp.n_ineq() > 0) val -= rep.ineq_dual.dot(qp.ineq * rep.primal - qp.ineq_rhs);
  if (qp.n_eq() > 0) val -= rep.eq_dual.dot(qp.eq * rep.primal - qp.eq_rhs);
  val -= rep.bound_dual.dot(rep.primal);
  return val;
}

}  // namespace

TEST_CASE("interior optimum of x^2 - 2x over x >= 0") {
  SubsolverReport<double> rep = solve_reduced(scalar_qp(2, -2));
  REQUIRE(rep.status == SubsolverStatus::ok);
  CHECK(rep.primal[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(rep.bound_dual[0]) < 1e-7);
  CHECK(rep.objective == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("symmetric simplex minimum with equality dual") {
  // min x1^2 + x2^2 s.t. x1 + x2 = 1, x >= 0 → x = (½, ½), ũ = 1
  ReducedQp<double> qp;
  qp.free = {0, 1};
  qp.hessian = 2 * MatrixX<double>::Identity(2, 2);
  qp.linear = VectorX<double>::Zero(2);
  qp.ineq.resize(0, 2);
  qp.ineq_rhs.resize(0);
  qp.eq = MatrixX<double>::Constant(1, 2, 1.0);
  qp.eq_rhs = VectorX<double>::Constant(1, 1.0);

  SubsolverReport<double> rep = solve_reduced(qp);
  REQUIRE(rep.status == SubsolverStatus::ok);
  CHECK(rep.primal[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.primal[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.eq_dual[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rep.bound_dual.lpNorm<Eigen::Infinity>() < 1e-7);
}

TEST_CASE("extract_subproblem gathers rows, columns, and constraint blocks") {
  Problem<double> p = random_dense_problem(3, 71, true, true);
  ReducedQp<double> qp = extract_subproblem(p, IndexList{1});
  CHECK(qp.free == IndexList{0, 2});
  const MatrixX<double>& Q = p.gram.dense();
  CHECK(qp.hessian(0, 0) == doctest::Approx(2 * Q(0, 0)));
  CHECK(qp.hessian(0, 1) == doctest::Approx(2 * Q(0, 2)));
  CHECK(qp.hessian(1, 1) == doctest::Approx(2 * Q(2, 2)));
  CHECK(qp.linear[0] == p.linear[0]);
  CHECK(qp.linear[1] == p.linear[2]);
  CHECK(qp.eq(0, 0) == p.eq_matrix.coeff(0, 0));
  CHECK(qp.eq(0, 1) == p.eq_matrix.coeff(0, 2));
  CHECK(qp.ineq(0, 1) == p.ineq_matrix.coeff(0, 2));

  ReducedQp<double> full = extract_subproblem(p, IndexList{});
  CHECK(full.size() == 3);
  CHECK((full.hessian - 2 * Q).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK_THROWS(extract_subproblem(p, IndexList{0, 1, 2}));
}

TEST_CASE("scatter round trip preserves the objective") {
  Problem<double> p = random_dense_problem(8, 81);
  IndexList active{1, 4, 6};
  ReducedQp<double> qp = extract_subproblem(p, active);
  VectorX<double> y = random_vector(qp.size(), 82).cwiseAbs();
  VectorX<double> x = scatter(qp.free, y, p.dim);
  for (Index i : active) CHECK(x[i] == 0);
  CHECK(restrict_to(qp.free, x).isApprox(y, 1e-15));
  // ½yᵀHy + gᵀy with H = 2Q equals the full objective at the scattered point
  CHECK(qp.objective(y) == doctest::Approx(objective(p, x)).epsilon(1e-12));
}

TEST_CASE("random five-variable QPs match the clamp-pattern enumeration oracle") {
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    ReducedQp<double> qp = random_five_var_qp(seed);
    auto truth = enumerate_qp(qp);
    REQUIRE(truth.has_value());
    SubsolverReport<double> rep = solve_reduced(qp);
    REQUIRE(rep.status == SubsolverStatus::ok);
    CHECK((rep.primal - *truth).lpNorm<Eigen::Infinity>() < 1e-7);
    ++solved;
  }
  CHECK(solved == 50);
}

TEST_CASE("strong duality at the returned point") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    Problem<double> p = random_dense_problem(7, seed, true, true);
    ReducedQp<double> qp = extract_subproblem(p, IndexList{2});
    SubsolverReport<double> rep = solve_reduced(qp);
    REQUIRE(rep.status == SubsolverStatus::ok);
    const double primal = qp.objective(rep.primal);
    CHECK(lagrangian_value(qp, rep) == doctest::Approx(primal).epsilon(1e-6));
  }
}

TEST_CASE("growing the active set never improves the reduced optimum") {
  Problem<double> p = random_dense_problem(8, 91, true, false);
  ReducedQp<double> small_active = extract_subproblem(p, IndexList{1});
  ReducedQp<double> large_active = extract_subproblem(p, IndexList{1, 3, 5});
  SubsolverReport<double> more_freedom = solve_reduced(small_active);
  SubsolverReport<double> less_freedom = solve_reduced(large_active);
  REQUIRE(more_freedom.status == SubsolverStatus::ok);
  REQUIRE(less_freedom.status == SubsolverStatus::ok);
  CHECK(more_freedom.objective <= less_freedom.objective + 1e-8);
}

TEST_CASE("warm start reaches the cold-start objective") {
  Problem<double> p = random_dense_problem(9, 101, true, false);
  ReducedQp<double> qp = extract_subproblem(p, IndexList{0, 7});
  SubsolverReport<double> cold = solve_reduced(qp);
  REQUIRE(cold.status == SubsolverStatus::ok);

  VectorX<double> start = cold.primal;
  start = start.cwiseMax(0.0);
  start[0] += 0.37;  // perturbed but feasible-ish start
  SubsolverReport<double> warm = solve_reduced<double>(qp, start);
  REQUIRE(warm.status == SubsolverStatus::ok);
  CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-8));
}

TEST_CASE("an infeasible subproblem is reported, not silently solved") {
  // x1 + x2 = 1 with x1 + x2 >= 2 cannot hold
  ReducedQp<double> qp;
  qp.free = {0, 1};
  qp.hessian = MatrixX<double>::Identity(2, 2);
  qp.linear = VectorX<double>::Zero(2);
  qp.eq = MatrixX<double>::Constant(1, 2, 1.0);
  qp.eq_rhs = VectorX<double>::Constant(1, 1.0);
  qp.ineq = MatrixX<double>::Constant(1, 2, 1.0);
  qp.ineq_rhs = VectorX<double>::Constant(1, 2.0);

  SubsolverReport<double> rep = solve_reduced(qp);
  CHECK(rep.status != SubsolverStatus::ok);
}

TEST_CASE("kkt_residual is small on success and duals are sign-feasible") {
  Problem<double> p = random_dense_problem(6, 111, true, true);
  ReducedQp<double> qp = extract_subproblem(p, IndexList{4});
  SubsolverReport<double> rep = solve_reduced(qp);
  REQUIRE(rep.status == SubsolverStatus::ok);
  CHECK(rep.kkt_residual <= 1e-9);
  if (qp.n_ineq() > 0) CHECK(rep.ineq_dual.minCoeff() >= 0);
  CHECK(rep.bound_dual.minCoeff() >= -1e-9);
  // stationarity re-checked from scratch
  VectorX<double> station = qp.hessian * rep.primal + qp.linear - rep.bound_dual;
  if (qp.n_ineq() > 0) station -= qp.ineq.transpose() * rep.ineq_dual;
  if (qp.n_eq() > 0) station -= qp.eq.transpose() * rep.eq_dual;
  CHECK(station.lpNorm<Eigen::Infinity>() <
        1e-7 * (1 + qp.linear.lpNorm<Eigen::Infinity>()));
}
