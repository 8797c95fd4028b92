#include <cmath>

#include <doctest.h>

#include "pipeopt/formulation.hpp"
#include "pipeopt/seaway.hpp"
#include "pipeopt/solver.hpp"
#include "instances.hpp"

using namespace pipeopt;

namespace {

// min (x-1)^2 on [0, 3]: interior optimum x* = 1, all duals zero.
NlpProblem parabola() {
  NlpProblem p;
  p.n = 1;
  p.m = 0;
  p.x_lower = Eigen::VectorXd::Constant(1, 0.0);
  p.x_upper = Eigen::VectorXd::Constant(1, 3.0);
  p.x_initial = Eigen::VectorXd::Constant(1, 2.5);
  p.g_lower.resize(0);
  p.g_upper.resize(0);
  p.eval_f = [](const Eigen::VectorXd& x) { return (x[0] - 1.0) * (x[0] - 1.0); };
  p.eval_grad_f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g[0] = 2.0 * (x[0] - 1.0);
  };
  p.eval_g = [](const Eigen::VectorXd&, Eigen::VectorXd&) {};
  p.eval_jac = [](const Eigen::VectorXd&, Eigen::VectorXd&) {};
  p.hess_pattern.rows = {0};
  p.hess_pattern.cols = {0};
  p.eval_hess = [](const Eigen::VectorXd&, double sf, const Eigen::VectorXd&,
                   Eigen::VectorXd& h) { h[0] = 2.0 * sf; };
  return p;
}

// min x1 + x2 s.t. x1*x2 >= 1, x >= 0: x* = (1, 1), row dual 1
// (J(b) = 2*sqrt(b) for rhs b, dJ/db = 1 at b = 1).
NlpProblem hyperbola() {
  NlpProblem p;
  p.n = 2;
  p.m = 1;
  p.x_lower = Eigen::VectorXd::Constant(2, 0.0);
  p.x_upper = Eigen::VectorXd::Constant(2, kInfinity);
  p.x_initial = Eigen::VectorXd::Constant(2, 2.0);
  p.g_lower = Eigen::VectorXd::Constant(1, 1.0);
  p.g_upper = Eigen::VectorXd::Constant(1, kInfinity);
  p.eval_f = [](const Eigen::VectorXd& x) { return x[0] + x[1]; };
  p.eval_grad_f = [](const Eigen::VectorXd&, Eigen::VectorXd& g) { g.setOnes(); };
  p.eval_g = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) { g[0] = x[0] * x[1]; };
  p.jac_pattern.rows = {0, 0};
  p.jac_pattern.cols = {0, 1};
  p.eval_jac = [](const Eigen::VectorXd& x, Eigen::VectorXd& j) {
    j[0] = x[1];
    j[1] = x[0];
  };
  p.hess_pattern.rows = {1};
  p.hess_pattern.cols = {0};
  p.eval_hess = [](const Eigen::VectorXd&, double, const Eigen::VectorXd& lam,
                   Eigen::VectorXd& h) { h[0] = lam[0]; };
  return p;
}

// min x^2 + y^2 s.t. x + y = 2: x* = y* = 1, dual dJ/db = b = 2.
NlpProblem equality() {
  NlpProblem p;
  p.n = 2;
  p.m = 1;
  p.x_lower = Eigen::VectorXd::Constant(2, -kInfinity);
  p.x_upper = Eigen::VectorXd::Constant(2, kInfinity);
  p.x_initial = Eigen::VectorXd::Zero(2);
  p.g_lower = Eigen::VectorXd::Constant(1, 2.0);
  p.g_upper = Eigen::VectorXd::Constant(1, 2.0);
  p.eval_f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  p.eval_grad_f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) { g = 2.0 * x; };
  p.eval_g = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) { g[0] = x[0] + x[1]; };
  p.jac_pattern.rows = {0, 0};
  p.jac_pattern.cols = {0, 1};
  p.eval_jac = [](const Eigen::VectorXd&, Eigen::VectorXd& j) { j.setOnes(); };
  p.hess_pattern.rows = {0, 1};
  p.hess_pattern.cols = {0, 1};
  p.eval_hess = [](const Eigen::VectorXd&, double sf, const Eigen::VectorXd&,
                   Eigen::VectorXd& h) { h.setConstant(2.0 * sf); };
  return p;
}

// min (x-1)^2 with the bound x >= 1.5 active: x* = 1.5, z_lower = 1.
NlpProblem bound_active() {
  NlpProblem p = parabola();
  p.x_lower[0] = 1.5;
  p.x_initial[0] = 2.0;
  return p;
}

// max -(x-2)^2 on [0, 10]: checks the declared-maximize code path.
NlpProblem maximize_parabola() {
  NlpProblem p = parabola();
  p.sense = ObjectiveSense::Maximize;
  p.x_upper[0] = 10.0;
  p.x_initial[0] = 7.0;
  p.eval_f = [](const Eigen::VectorXd& x) { return -(x[0] - 2.0) * (x[0] - 2.0); };
  p.eval_grad_f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g[0] = -2.0 * (x[0] - 2.0);
  };
  p.eval_hess = [](const Eigen::VectorXd&, double sf, const Eigen::VectorXd&,
                   Eigen::VectorXd& h) { h[0] = -2.0 * sf; };
  return p;
}

// min x^2 + y^2 s.t. 1 <= x + y <= 3, active at the lower end:
// x* = y* = 0.5, ranged-row dual dJ/db = 1.
NlpProblem ranged() {
  NlpProblem p = equality();
  p.g_lower[0] = 1.0;
  p.g_upper[0] = 3.0;
  return p;
}

}  // namespace

TEST_CASE("interior optimum of a parabola") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(parabola(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(r.z_lower[0]) <= 1e-7);
  CHECK(std::abs(r.z_upper[0]) <= 1e-7);
}

TEST_CASE("inequality-constrained optimum with known dual") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(hyperbola(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.lambda[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("equality-constrained optimum with known dual") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(equality(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.lambda[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("active bound yields its multiplier") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(bound_active(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(r.z_lower[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("maximization sense") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(maximize_parabola(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(r.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("ranged row active at its lower end") {
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(ranged(), {});
  REQUIRE(r.status == SolveStatus::LocallyOptimal);
  CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.lambda[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.slack[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("independent KKT audit stays within tolerance") {
  auto solver = make_default_solver();
  for (auto make : {parabola, hyperbola, equality, ranged, maximize_parabola}) {
    const NlpProblem p = make();
    const SolveResult r = solver->solve(p, {});
    REQUIRE(r.status == SolveStatus::LocallyOptimal);
    const KktResiduals audit = kkt_residuals(p, r);
    CHECK(audit.stationarity <= 1e-7);
    CHECK(audit.feasibility <= 1e-7);
    CHECK(audit.complementarity <= 1e-7);
  }
}

TEST_CASE("solves are bitwise deterministic") {
  const CaseManifest cm = generate_seaway();
  const NlpProblem p = build_nlp(cm.network, {Formulation::MaxTotalValue, {}});
  auto solver = make_default_solver();
  const SolveResult a = solver->solve(p, {});
  const SolveResult b = solver->solve(p, {});
  REQUIRE(a.status == SolveStatus::LocallyOptimal);
  REQUIRE(b.status == SolveStatus::LocallyOptimal);
  CHECK(a.x == b.x);           // bitwise
  CHECK(a.lambda == b.lambda);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("warm start converges and saves iterations") {
  const Network net = testing::dual_chain();
  const FormulationKind kind{Formulation::MaxTotalValue, {}};
  const NlpProblem p = build_nlp(net, kind);
  auto solver = make_default_solver();
  const SolveResult cold = solver->solve(p, {});
  REQUIRE(cold.status == SolveStatus::LocallyOptimal);
  const WarmStart warm{cold.x, cold.lambda, cold.z_lower, cold.z_upper};
  const SolveResult again = solver->solve(p, {}, warm);
  REQUIRE(again.status == SolveStatus::LocallyOptimal);
  CHECK(again.iterations < cold.iterations);
  CHECK(again.objective == doctest::Approx(cold.objective).epsilon(1e-8));
}

TEST_CASE("iteration limit reports max_iterations") {
  SolverOptions opts;
  opts.max_iter = 1;
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(hyperbola(), opts);
  CHECK(r.status == SolveStatus::MaxIterations);
}

TEST_CASE("infeasible rows are detected") {
  NlpProblem p = hyperbola();
  p.x_upper = Eigen::VectorXd::Constant(2, 0.5);  // x1*x2 <= 0.25 < 1
  p.x_initial = Eigen::VectorXd::Constant(2, 0.25);
  auto solver = make_default_solver();
  const SolveResult r = solver->solve(p, {});
  CHECK(r.status != SolveStatus::LocallyOptimal);
}
