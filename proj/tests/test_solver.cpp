#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcra/instances.hpp"
#include "dcra/rounding.hpp"
#include "dcra/solver.hpp"
#include "test_util.hpp"

using namespace dcra;

namespace {

// rank-one sign pattern point in S: column j is s_j * q
FactorizedPoint rank_one_point(const Vector& q_unit, const std::vector<int>& signs) {
  Matrix V(static_cast<int>(q_unit.size()), static_cast<int>(signs.size()));
  for (int j = 0; j < V.cols; ++j)
    for (int i = 0; i < V.rows; ++i) V(i, j) = signs[static_cast<std::size_t>(j)] * q_unit[static_cast<std::size_t>(i)];
  return FactorizedPoint{V};
}

ProblemInstance toy_instance() {
  Matrix A(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 1.0;
  return make_instance(A, Vector{0.5, -0.5}, SeparableLoss({LossBlock::l1(2)}));
}

}  // namespace

TEST_CASE("project_columns") {
  const FactorizedPoint P = testutil::random_point(3, 5, 1);
  const FactorizedPoint again = project_columns(P.V);
  for (std::size_t i = 0; i < P.V.data.size(); ++i)
    CHECK(again.V.data[i] == doctest::Approx(P.V.data[i]).epsilon(1e-14).scale(1.0));

  Matrix doubled = P.V;
  for (auto& v : doubled.data) v *= 2.0;
  const FactorizedPoint halved = project_columns(doubled);
  for (std::size_t i = 0; i < P.V.data.size(); ++i)
    CHECK(halved.V.data[i] == doctest::Approx(P.V.data[i]).epsilon(1e-14).scale(1.0));

  const Matrix M = testutil::random_matrix(4, 11, 2);
  const FactorizedPoint proj = project_columns(M);
  for (int j = 0; j < 11; ++j) {
    double sq = 0.0;
    for (int i = 0; i < 4; ++i) sq += proj.V(i, j) * proj.V(i, j);
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-14));
  }

  Matrix with_zero = M;
  for (int i = 0; i < 4; ++i) with_zero(i, 7) = 0.0;
  CHECK_THROWS_WITH_AS(project_columns(with_zero), doctest::Contains("column 7"), std::runtime_error);
}

TEST_CASE("inner_step fixed points") {
  // rank-one V with zero gradient: b = A u makes the residual vanish
  const int n = 4;
  Vector q{0.6, -0.8};
  std::vector<int> signs{1, -1, 1, 1, -1};
  const FactorizedPoint V = rank_one_point(q, signs);
  const Matrix A = testutil::random_matrix(3, n, 3);
  Vector u(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] = signs[0] * signs[static_cast<std::size_t>(j) + 1];
  Vector b(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < n; ++j) b[static_cast<std::size_t>(i)] += A(i, j) * u[static_cast<std::size_t>(j)];
  auto inst = make_instance(A, b, SeparableLoss({LossBlock::l1(3)}));

  SUBCASE("with penalty") {
    const SmoothedObjective obj(inst, 0.4, 2.0);
    const FactorizedPoint out = inner_step(obj, V, 5.0);
    for (std::size_t i = 0; i < V.V.data.size(); ++i)
      CHECK(out.V.data[i] == doctest::Approx(V.V.data[i]).epsilon(1e-12).scale(1.0));
  }
  SUBCASE("rho = 0") {
    const SmoothedObjective obj(inst, 0.4, 0.0);
    const FactorizedPoint out = inner_step(obj, V, 5.0);
    for (std::size_t i = 0; i < V.V.data.size(); ++i)
      CHECK(out.V.data[i] == doctest::Approx(V.V.data[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("inner_step matches a direct transcription of the update formula") {
  // scripted 2x3 case at a rank-one point, where the leading singular pair
  // is available in closed form (P1 = signs/sqrt(p)) and both sides of the
  // comparison are exact to roundoff
  const ProblemInstance inst = gen_random_l1(2, 3, 4);
  const Vector q{0.6, -0.8};
  const std::vector<int> signs{1, -1, 1};
  const FactorizedPoint V = rank_one_point(q, signs);
  const double delta = 0.3, rho = 1.4, L = 3.7;
  const SmoothedObjective obj(inst, delta, rho);

  const FactorizedPoint got = inner_step(obj, V, L);

  // independent transcription: dense arrow-shaped adjoint, hand-evaluated
  // spectral subgradient, column-normalized closed form
  const Eigen::MatrixXd Ve = testutil::to_eigen(V.V);
  const Vector res = lifted_residual(inst, V);
  const Vector eg = envelope_gradient(inst.loss, res, delta);
  Eigen::VectorXd ge(3);
  for (int i = 0; i < 3; ++i) ge(i) = eg[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd Ae = testutil::to_eigen(inst.A);
  const Eigen::VectorXd w = Ae.transpose() * ge;
  Eigen::MatrixXd Astar = Eigen::MatrixXd::Zero(3, 3);
  Astar.block(0, 1, 1, 2) = 0.5 * w.transpose();
  Astar.block(1, 0, 2, 1) = 0.5 * w;
  const Eigen::MatrixXd grad = 2.0 * Ve * Astar;

  Eigen::VectorXd p1(3);
  for (int j = 0; j < 3; ++j) p1(j) = signs[static_cast<std::size_t>(j)] / std::sqrt(3.0);
  const Eigen::MatrixXd gamma = -2.0 * Ve * p1 * p1.transpose();

  Eigen::MatrixXd num = (L * Ve - grad - rho * gamma) / (2.0 * rho + L);
  for (int j = 0; j < 3; ++j) num.col(j).normalize();

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(got.V(i, j) == doctest::Approx(num(i, j)).epsilon(1e-12).scale(1.0));
}

TEST_CASE("solve_inner: fixed point returns immediately") {
  Vector q{1.0, 0.0};
  std::vector<int> signs{1, 1, -1};
  const FactorizedPoint V = rank_one_point(q, signs);
  Matrix A = testutil::random_matrix(2, 2, 6);
  Vector u{static_cast<double>(signs[1] * signs[0]), static_cast<double>(signs[2] * signs[0])};
  Vector b(2, 0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b[static_cast<std::size_t>(i)] += A(i, j) * u[static_cast<std::size_t>(j)];
  auto inst = make_instance(A, b, SeparableLoss({LossBlock::l1(2)}));
  const SmoothedObjective obj(inst, 0.5, 3.0);
  SolverConfig cfg;
  cfg.m = 2;
  const InnerResult res = solve_inner(obj, V, cfg);
  CHECK(res.iters == 1);
  CHECK(res.last_step_norm <= 1e-12);
}

TEST_CASE("solve_inner: huge rho drives the iterate numerically rank-one") {
  const ProblemInstance inst = gen_random_l1(6, 5, 7);
  const SmoothedObjective obj(inst, default_delta(inst), 1e8);
  SolverConfig cfg;
  const FactorizedPoint V0 = initial_point(cfg.m, 7, 8);
  const InnerResult res = solve_inner(obj, V0, cfg);
  const auto svd = testutil::full_svd(res.V.V);
  const double gap = frobenius_norm_sq(res.V.V) - svd.sigma1 * svd.sigma1;
  CHECK(gap < 1e-4);
}

TEST_CASE("solve_inner: Phi trace is nonincreasing (toy l1 instance)") {
  auto inst = toy_instance();
  const SmoothedObjective obj(inst, default_delta(inst), 2.0);
  SolverConfig cfg;
  cfg.m = 3;
  const FactorizedPoint V0 = initial_point(3, 3, 9);
  const InnerResult res = solve_inner(obj, V0, cfg);
  REQUIRE(!res.rows.empty());
  CHECK(res.rows.front().phi_prev == doctest::Approx(res.phi0));
  double prev = res.phi0;
  for (const auto& row : res.rows) {
    CHECK(row.phi <= prev + 1e-9);
    prev = row.phi;
  }
}

TEST_CASE("solve: toy instance reaches the gap and rounds to the optimum") {
  auto inst = toy_instance();
  SolverConfig cfg;
  cfg.m = 3;
  cfg.seed = 0;
  const SolveResult res = solve(inst, cfg);
  CHECK(res.trace.termination == Termination::GapReached);
  CHECK(res.trace.rows.back().gap <= cfg.eps_outer);
  const auto z = sign_round(rank_one_project(res.V));
  REQUIRE(z.size() == 2);
  CHECK(z[0] == 1);
  CHECK(z[1] == -1);
  // every iterate stays on S; check the final one explicitly
  validate_factorized(res.V);
}

TEST_CASE("solve: loose tolerance terminates at k = 0") {
  // a large rho0 makes the first inner solve land near rank one, so the
  // relaxed stop test is satisfied immediately
  auto inst = toy_instance();
  SolverConfig cfg;
  cfg.m = 3;
  cfg.seed = 12;
  cfg.rho0 = 50.0;
  cfg.eps_outer = 0.99;
  const SolveResult res = solve(inst, cfg);
  CHECK(res.trace.termination == Termination::GapReached);
  CHECK(res.trace.rows.size() == 1);
  CHECK(res.trace.rows[0].k == 0);
}

TEST_CASE("solve: rho schedule is exact and the trace is deterministic") {
  const ProblemInstance inst = gen_random_l1(8, 6, 13);
  SolverConfig cfg;
  cfg.seed = 14;
  cfg.rho0 = 0.4;
  cfg.eps_outer = 1e-3;
  const SolveResult a = solve(inst, cfg);
  const SolveResult b = solve(inst, cfg);

  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  CHECK(a.V.V.data == b.V.V.data);
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].gap == b.trace.rows[i].gap);
    CHECK(a.trace.rows[i].phi == b.trace.rows[i].phi);
    CHECK(a.trace.rows[i].rho == b.trace.rows[i].rho);
  }

  CHECK(a.trace.rows[0].rho == *cfg.rho0);
  for (std::size_t i = 0; i + 1 < a.trace.rows.size(); ++i)
    CHECK(a.trace.rows[i + 1].rho == std::min(cfg.sigma * a.trace.rows[i].rho, cfg.rho_max));
}

TEST_CASE("stationarity surrogate") {
  const ProblemInstance inst = gen_random_l1(4, 3, 15);
  const SmoothedObjective obj(inst, 0.3, 1.0);
  const FactorizedPoint V = testutil::random_point(3, 5, 16);
  CHECK(stationarity_surrogate(obj, V, V, 2.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // A = 0 makes grad f~ identically zero, so only the L term remains
  Matrix zeroA(3, 4);
  auto flat = make_instance(zeroA, Vector{1, 2, 3}, SeparableLoss({LossBlock::l1(3)}));
  const SmoothedObjective fobj(flat, 0.3, 1.0);
  const FactorizedPoint W = testutil::random_point(3, 5, 17);
  double dist = 0.0;
  for (std::size_t i = 0; i < V.V.data.size(); ++i) {
    const double d = V.V.data[i] - W.V.data[i];
    dist += d * d;
  }
  CHECK(stationarity_surrogate(fobj, V, W, 2.0) == doctest::Approx(2.0 * std::sqrt(dist)).epsilon(1e-12));

  // triangle inequality against the raw optimality-residual combination
  const Matrix gp = smoothed_gradient(obj, V);
  const Matrix gn = smoothed_gradient(obj, W);
  double combo = 0.0;
  for (std::size_t i = 0; i < gp.data.size(); ++i) {
    const double d = (gn.data[i] - gp.data[i]) - 2.0 * (W.V.data[i] - V.V.data[i]);
    combo += d * d;
  }
  CHECK(stationarity_surrogate(obj, V, W, 2.0) >= std::sqrt(combo) - 1e-12);
}

TEST_CASE("termination statuses: KMaxExceeded and InnerStall") {
  const ProblemInstance inst = gen_random_l1(10, 14, 44);
  {
    SolverConfig cfg;
    cfg.seed = 1;
    cfg.k_max = 0;
    cfg.eps_inner = 1e-3;  // the single inner solve converges, the gap test fails
    cfg.eps_outer = 1e-9;
    const SolveResult res = solve(inst, cfg);
    CHECK(res.trace.termination == Termination::KMaxExceeded);
    CHECK(res.trace.rows.size() == 1);
  }
  {
    SolverConfig cfg;
    cfg.seed = 1;
    cfg.k_max = 0;
    cfg.l_max = 1;  // one big step, far above 10*eps_inner
    cfg.eps_outer = 1e-9;
    const SolveResult res = solve(inst, cfg);
    CHECK(res.trace.termination == Termination::InnerStall);
  }
}

TEST_CASE("initial point is full rank and deterministic") {
  const FactorizedPoint P = initial_point(5, 20, 42);
  validate_factorized(P);
  CHECK(numerical_rank(P.V) == 5);
  const FactorizedPoint Q = initial_point(5, 20, 42);
  CHECK(P.V.data == Q.V.data);
}

TEST_CASE("config validation") {
  SolverConfig cfg;
  cfg.sigma = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.rho0 = 10.0;
  cfg.rho_max = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.rho0 = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.eps_outer = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = SolverConfig{};
  cfg.m = 1;
  CHECK_THROWS(cfg.validate());
}
