#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "gep/bnb.hpp"
#include "gep/model.hpp"
#include "support/test_util.hpp"

using namespace gep;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CanonicalProblem blank(int n) {
  CanonicalProblem p;
  p.num_vars = n;
  p.c = Vec::Zero(n);
  p.lower = Vec::Constant(n, -kInf);
  p.upper = Vec::Constant(n, kInf);
  p.integral.assign(n, 0);
  p.Q.resize(n, n);
  p.a_eq.resize(0, n);
  p.b_eq.resize(0);
  p.a_in.resize(0, n);
  p.b_in.resize(0);
  return p;
}

}  // namespace

TEST_CASE("box LP: positive costs drive the box to zero") {
  CanonicalProblem p = blank(5);
  p.c << 1.0, 2.0, 0.5, 3.0, 1.5;
  p.lower.setZero();
  p.upper.setOnes();
  const SolveResult res = solve_convex(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-8));
  for (int j = 0; j < 5; ++j) CHECK(res.primal[j] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(res.dual_objective <= res.objective + 1e-6);
}

TEST_CASE("projection QP onto a hyperplane has the closed-form shift") {
  const int n = 4;
  CanonicalProblem p = blank(n);
  Vec r(n);
  r << 0.3, -1.2, 2.0, 0.7;
  // min ||z - r||^2 s.t. sum z = s
  std::vector<Eigen::Triplet<double>> qt, at;
  for (int j = 0; j < n; ++j) {
    qt.emplace_back(j, j, 2.0);
    at.emplace_back(0, j, 1.0);
  }
  p.Q.setFromTriplets(qt.begin(), qt.end());
  p.c = -2.0 * r;
  p.c0 = r.squaredNorm();
  p.a_eq.resize(1, n);
  p.a_eq.setFromTriplets(at.begin(), at.end());
  p.b_eq = Vec::Constant(1, 5.0);
  const SolveResult res = solve_convex(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  const Vec expect = r + Vec::Constant(n, (5.0 - r.sum()) / n);
  for (int j = 0; j < n; ++j) CHECK(res.primal[j] == doctest::Approx(expect[j]).epsilon(1e-7));
  CHECK(res.dual_objective <= res.objective + 1e-6);
}

TEST_CASE("inconsistent equality row is infeasible") {
  CanonicalProblem p = blank(2);
  p.lower.setZero();
  p.a_eq.resize(1, 2);  // empty row: 0 = 1
  p.b_eq = Vec::Constant(1, 1.0);
  CHECK(solve_convex(p).status == SolveStatus::Infeasible);
}

TEST_CASE("crossing linear rows are infeasible") {
  CanonicalProblem p = blank(1);
  p.c << 1.0;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 0, -1.0}};
  p.a_in.resize(2, 1);
  p.a_in.setFromTriplets(t.begin(), t.end());
  p.b_in.resize(2);
  p.b_in << -2.0, 1.0;  // z <= -2 and z >= -1
  CHECK(solve_convex(p).status == SolveStatus::Infeasible);
}

TEST_CASE("free descent direction is unbounded") {
  CanonicalProblem p = blank(1);
  p.c << -1.0;
  p.lower << 0.0;
  CHECK(solve_convex(p).status == SolveStatus::Unbounded);
}

TEST_CASE("non-PSD objective violates the contract") {
  CanonicalProblem p = blank(2);
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, -1.0}};
  p.Q.setFromTriplets(t.begin(), t.end());
  p.lower.setZero();
  p.upper.setOnes();
  CHECK_THROWS_AS(solve_convex(p), std::invalid_argument);
}

TEST_CASE("quadratic cap binds a linear objective") {
  // max z (as min -z) with z >= 0 and z^2 <= 4, i.e. 0.5*z'(2)z - 4 <= 0.
  CanonicalProblem p = blank(1);
  p.c << -1.0;
  p.lower << 0.0;
  QuadConstraint qc;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 2.0}};
  qc.P.resize(1, 1);
  qc.P.setFromTriplets(t.begin(), t.end());
  qc.r = Vec::Zero(1);
  qc.d = -4.0;
  p.qcap = qc;
  const SolveResult res = solve_convex(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.primal[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(res.dual_qcap > 0.0);
}

TEST_CASE("fixed variables are eliminated and reported back") {
  CanonicalProblem p = blank(3);
  p.c << 1.0, 1.0, 1.0;
  p.lower << 0.0, 2.5, 0.0;
  p.upper << 1.0, 2.5, 1.0;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}};
  p.a_eq.resize(1, 3);
  p.a_eq.setFromTriplets(t.begin(), t.end());
  p.b_eq = Vec::Constant(1, 3.0);
  const SolveResult res = solve_convex(p);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.primal[1] == 2.5);
  CHECK(res.objective == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("full GEP relaxations satisfy weak duality and KKT residuals") {
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    const GepInstance inst = test::random_instance(seed);
    for (ModelKind kind : {ModelKind::Milp, ModelKind::Miqp}) {
      CanonicalProblem prob = build_full(inst, kind);
      const SolveResult res = solve_convex(prob);  // relaxation: mask ignored
      REQUIRE(res.status == SolveStatus::Optimal);
      CHECK(res.dual_objective <= res.objective + 1e-6 * std::max(1.0, std::abs(res.objective)));
      CHECK(prob.max_residual(res.primal) <= 1e-6);
    }
  }
}

TEST_CASE("empty integrality mask reduces solve_mip to solve_convex") {
  const GepInstance inst = test::random_instance(21);
  CanonicalProblem prob = build_restricted(inst, Vec::Ones(inst.num_units()), ModelKind::Milp);
  const SolveResult mip = solve_mip(prob);
  const SolveResult cvx = solve_convex(prob);
  REQUIRE(mip.status == SolveStatus::Optimal);
  CHECK(mip.objective == doctest::Approx(cvx.objective).epsilon(1e-10));
}

TEST_CASE("root relaxation bounds the mixed-integer optimum from below") {
  const GepInstance inst = test::random_instance(33, 3, 3, 12, 24);
  const SolveResult res = solve_mip(build_full(inst, ModelKind::Milp));
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.root_relaxation <= res.objective + 1e-6 * std::max(1.0, std::abs(res.objective)));
}

TEST_CASE("branch-and-bound matches exhaustive enumeration both ways") {
  int checked = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const GepInstance inst = test::random_instance(seed, 4, 4, 6, 24);
    if (inst.num_units() > 8) continue;
    const ModelKind kind = (seed % 2) ? ModelKind::Milp : ModelKind::Miqp;
    const CanonicalProblem prob = build_full(inst, kind);
    BnbOptions opts;
    opts.relative_gap = 1e-10;
    const SolveResult mip = solve_mip(prob, opts);
    const SolveResult enu = enumerate_binaries(prob);
    REQUIRE(mip.status == SolveStatus::Optimal);
    REQUIRE(enu.status == SolveStatus::Optimal);
    CHECK(std::abs(mip.objective - enu.objective) <= 1e-6);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("branch-and-bound lower bound is monotone and incumbents non-increasing") {
  const GepInstance inst = test::random_instance(77, 4, 4, 12, 24);
  BnbOptions opts;
  std::vector<double> lbs, incs;
  opts.on_node = [&](long, double, double global_lb, double incumbent) {
    lbs.push_back(global_lb);
    incs.push_back(incumbent);
  };
  const SolveResult res = solve_mip(build_full(inst, ModelKind::Milp), opts);
  REQUIRE(res.status == SolveStatus::Optimal);
  for (std::size_t i = 1; i < lbs.size(); ++i) {
    CHECK(lbs[i] >= lbs[i - 1] - 1e-9 * std::max(1.0, std::abs(lbs[i])));
    CHECK(incs[i] <= incs[i - 1] + 1e-9);
  }
}

TEST_CASE("enumerate_binaries handles zero and one binary") {
  CanonicalProblem p = blank(2);
  p.c << 1.0, -3.0;
  p.lower.setZero();
  p.upper.setOnes();
  SUBCASE("no binaries: single convex solve") {
    const SolveResult res = enumerate_binaries(p);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-3.0).epsilon(1e-7));
  }
  SUBCASE("one binary: best of the two restrictions") {
    p.integral[1] = 1;
    const SolveResult res = enumerate_binaries(p);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.objective == doctest::Approx(-3.0).epsilon(1e-7));
    CHECK(res.primal[1] == 1.0);
  }
}

TEST_CASE("enumerate_binaries refuses huge masks") {
  CanonicalProblem p = blank(21);
  p.lower.setZero();
  p.upper.setOnes();
  p.integral.assign(21, 1);
  CHECK_THROWS_AS(enumerate_binaries(p), std::invalid_argument);
}

TEST_CASE("node limit returns iteration_limit with a valid bound") {
  const GepInstance inst = test::random_instance(55, 5, 5, 24, 36);
  BnbOptions opts;
  opts.node_limit = 1;
  const SolveResult res = solve_mip(build_full(inst, ModelKind::Milp), opts);
  const SolveResult exact = solve_mip(build_full(inst, ModelKind::Milp));
  if (res.status == SolveStatus::IterationLimit) {
    CHECK(res.objective >= exact.objective - 1e-6 * std::max(1.0, std::abs(exact.objective)));
  } else {
    CHECK(res.objective == doctest::Approx(exact.objective).epsilon(1e-8));
  }
}
