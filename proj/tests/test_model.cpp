#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcra/instances.hpp"
#include "dcra/kernels.hpp"
#include "dcra/model.hpp"
#include "test_util.hpp"

using namespace dcra;

namespace {

ProblemInstance identity_instance(Vector b) {
  const int n = static_cast<int>(b.size());
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = 1.0;
  return make_instance(std::move(A), std::move(b), SeparableLoss({LossBlock::l1(n)}));
}

}  // namespace

TEST_CASE("lifted_residual worked examples") {
  // all columns equal to one unit vector: V^T V is all-ones
  {
    auto inst = identity_instance(Vector{0, 0});
    Matrix V(2, 3);
    for (int j = 0; j < 3; ++j) {
      V(0, j) = 0.6;
      V(1, j) = 0.8;
    }
    const Vector res = lifted_residual(inst, FactorizedPoint{V});
    CHECK(res[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // column 0 orthogonal to the rest: residual is -b
  {
    auto inst = identity_instance(Vector{0.25, -0.5});
    Matrix V(2, 3);
    V(0, 0) = 1.0;
    V(1, 1) = 1.0;
    V(1, 2) = -1.0;
    const Vector res = lifted_residual(inst, FactorizedPoint{V});
    CHECK(res[0] == doctest::Approx(-0.25));
    CHECK(res[1] == doctest::Approx(0.5));
  }
}

TEST_CASE("matrix-free lifted_residual equals the dense lift on 100 random cases") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(40'000 + seed);
    const int n = 1 + static_cast<int>(rng.next_u64() % 10);
    const int r = 1 + static_cast<int>(rng.next_u64() % 8);
    const int m = 2 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n + 1 > 5 ? 4 : n));
    const ProblemInstance inst = gen_random_l1(n, r, seed);
    const FactorizedPoint P = testutil::random_point(std::min(m, n + 1), n + 1, seed + 1);

    const Vector fast = lifted_residual(inst, P);
    const Vector dense = testutil::dense_lift(inst, P.V);
    for (int i = 0; i < r; ++i)
      CHECK(fast[static_cast<std::size_t>(i)] ==
            doctest::Approx(dense[static_cast<std::size_t>(i)]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("smoothed_value penalty term and rho = 0 behaviour") {
  const ProblemInstance inst = gen_random_l1(6, 4, 9);
  const FactorizedPoint P = testutil::random_point(4, 7, 10);

  const SmoothedObjective plain(inst, 0.3, 0.0);
  const Vector res = lifted_residual(inst, P);
  CHECK(smoothed_value(plain, P) == doctest::Approx(envelope(inst.loss, res, 0.3)).epsilon(1e-13));

  const SmoothedObjective pen(inst, 0.3, 2.5);
  const auto svd = testutil::full_svd(P.V);
  const double fro2 = frobenius_norm_sq(P.V);
  const double expected = envelope(inst.loss, res, 0.3) + 2.5 * (fro2 - svd.sigma1 * svd.sigma1);
  CHECK(smoothed_value(pen, P) == doctest::Approx(expected).epsilon(1e-10));

  // rank-one point in S: penalty contributes nothing
  Matrix R(3, 7);
  Rng rng(11);
  Vector q{0.0, 0.0, 0.0};
  for (auto& v : q) v = rng.normal();
  const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
  for (int j = 0; j < 7; ++j) {
    const double s = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    for (int i = 0; i < 3; ++i) R(i, j) = s * q[static_cast<std::size_t>(i)] / qn;
  }
  const ProblemInstance inst6 = gen_random_l1(6, 4, 12);
  const FactorizedPoint rank_one{R};
  const SmoothedObjective pen6(inst6, 0.3, 1e4);
  const SmoothedObjective plain6(inst6, 0.3, 0.0);
  CHECK(smoothed_value(pen6, rank_one) == doctest::Approx(smoothed_value(plain6, rank_one)).epsilon(1e-9));
}

TEST_CASE("smoothed_value is invariant under left rotations of V") {
  const ProblemInstance inst = gen_random_l1(5, 7, 13);
  const FactorizedPoint P = testutil::random_point(3, 6, 14);
  const SmoothedObjective obj(inst, 0.2, 1.7);
  const double base = smoothed_value(obj, P);

  // random orthogonal 3x3 via QR of a Gaussian matrix
  Eigen::MatrixXd G = testutil::to_eigen(testutil::random_matrix(3, 3, 15));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Matrix rotated(3, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 6; ++j) {
      double s = 0.0;
      for (int t = 0; t < 3; ++t) s += Q(i, t) * P.V(t, j);
      rotated(i, j) = s;
    }
  CHECK(smoothed_value(obj, FactorizedPoint{rotated}) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("smoothed_gradient: trivial cases and finite differences") {
  // n = 1: single cross term
  {
    Matrix A(1, 1);
    A(0, 0) = 1.0;
    auto inst = make_instance(A, Vector{0.2}, SeparableLoss({LossBlock::l1(1)}));
    const FactorizedPoint P = testutil::random_point(2, 2, 16);
    const SmoothedObjective obj(inst, 0.5, 0.0);
    const Matrix g = smoothed_gradient(obj, P);
    const Vector res = lifted_residual(inst, P);
    const Vector eg = envelope_gradient(inst.loss, res, 0.5);
    const double w = eg[0];  // A^T g with A = I_1
    CHECK(g(0, 0) == doctest::Approx(w * P.V(0, 1)));
    CHECK(g(1, 0) == doctest::Approx(w * P.V(1, 1)));
    CHECK(g(0, 1) == doctest::Approx(w * P.V(0, 0)));
    CHECK(g(1, 1) == doctest::Approx(w * P.V(1, 0)));
  }

  // finite differences of smoothed_value with rho = 0 on random 4x5 points
  int accepted = 0;
  for (std::uint64_t seed = 0; accepted < 50 && seed < 400; ++seed) {
    const ProblemInstance inst = gen_random_l1(4, 3 + static_cast<int>(seed % 4), 700 + seed);
    const double delta = 0.2 + 0.3 * (seed % 3);
    FactorizedPoint P = testutil::random_point(4, 5, 900 + seed);

    // keep residual coordinates away from the envelope's second-derivative
    // kinks so the central differences converge at 1e-5
    const Vector res = lifted_residual(inst, P);
    bool near_kink = false;
    for (double v : res)
      if (std::abs(std::abs(v) - delta) < 1e-3) near_kink = true;
    if (near_kink) continue;
    ++accepted;

    const SmoothedObjective obj(inst, delta, 0.0);
    const Matrix g = smoothed_gradient(obj, P);
    Vector flat = P.V.data;
    const Vector fd = testutil::fd_gradient(
        [&](const Vector& vec) {
          Matrix M = P.V;
          M.data = vec;
          FactorizedPoint Q{M};
          const Vector rr = lifted_residual(inst, Q);
          return envelope(inst.loss, rr, delta);
        },
        flat, 1e-6);
    for (std::size_t i = 0; i < fd.size(); ++i)
      CHECK(g.data[i] == doctest::Approx(fd[i]).epsilon(1e-5).scale(1.0));
  }
  CHECK(accepted == 50);
}

TEST_CASE("spectral_subgradient against the full SVD oracle") {
  // rank-one: Gamma = -2V
  {
    Matrix V(3, 4);
    const double q[3] = {2.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0};
    const double u[4] = {0.5, 0.5, 0.5, 0.5};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) V(i, j) = q[i] * u[j];
    const auto sg = spectral_subgradient(FactorizedPoint{V});
    CHECK(sg.sigma1 == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < V.data.size(); ++i)
      CHECK(sg.gamma.data[i] == doctest::Approx(-2.0 * V.data[i]).epsilon(1e-10).scale(1.0));
  }

  // orthonormal rows scaled by [2, 1]
  {
    Matrix V(2, 3);
    V(0, 0) = 2.0;
    V(1, 1) = 1.0;
    const auto sg = spectral_subgradient(FactorizedPoint{V});
    CHECK(sg.sigma1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(sg.p1[0]) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(sg.p1[1]) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  }

  // random 5x20 against Eigen
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Matrix V = testutil::random_matrix(5, 20, 300 + seed);
    const auto sg = spectral_subgradient(FactorizedPoint{V});
    const auto svd = testutil::full_svd(V);
    CHECK(sg.sigma1 == doctest::Approx(svd.sigma1).epsilon(1e-8));
    const double flip = (sg.p1[0] * svd.right(0)) < 0 ? -1.0 : 1.0;
    for (int j = 0; j < 20; ++j)
      CHECK(sg.p1[static_cast<std::size_t>(j)] ==
            doctest::Approx(flip * svd.right(j)).epsilon(1e-7).scale(1.0));

    // nuclear norm identity ||Gamma||_* = 2 ||V||_2
    CHECK(testutil::nuclear_norm(sg.gamma) == doctest::Approx(2.0 * svd.sigma1).epsilon(1e-8));

    // homogenization sign convention
    CHECK(sg.p1[0] >= 0.0);
  }
}

TEST_CASE("penalty nonnegativity and rank-one characterization") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FactorizedPoint P = testutil::random_point(4, 9, 500 + seed);
    const auto svd = testutil::full_svd(P.V);
    const double gap = frobenius_norm_sq(P.V) - svd.sigma1 * svd.sigma1;
    CHECK(gap >= -1e-12);
  }
  // equality exactly at rank one
  Matrix V(2, 3);
  for (int j = 0; j < 3; ++j) {
    V(0, j) = 0.8;
    V(1, j) = 0.6;
  }
  const auto svd = testutil::full_svd(V);
  CHECK(frobenius_norm_sq(V) - svd.sigma1 * svd.sigma1 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("true_objective worked examples") {
  auto inst = identity_instance(Vector{0.5, -0.5});
  CHECK(true_objective(inst, {1, -1}) == doctest::Approx(1.0));
  CHECK_THROWS(true_objective(inst, {1, 2}));
  CHECK_THROWS(true_objective(inst, {1}));

  // exact fit: b = A e
  const ProblemInstance rnd = gen_random_l1(5, 4, 33);
  Vector be(static_cast<std::size_t>(rnd.r), 0.0);
  for (int i = 0; i < rnd.r; ++i)
    for (int j = 0; j < rnd.n; ++j) be[static_cast<std::size_t>(i)] += rnd.A(i, j);
  auto fit = make_instance(rnd.A, be, SeparableLoss({LossBlock::l1(rnd.r)}));
  CHECK(true_objective(fit, std::vector<int>(5, 1)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // random instance equals a direct recomputation
  Rng rng(34);
  std::vector<int> z(5);
  for (auto& v : z) v = rng.uniform01() < 0.5 ? -1 : 1;
  double direct = 0.0;
  for (int i = 0; i < rnd.r; ++i) {
    double row = -rnd.b[static_cast<std::size_t>(i)];
    for (int j = 0; j < rnd.n; ++j) row += rnd.A(i, j) * z[static_cast<std::size_t>(j)];
    direct += std::abs(row);
  }
  CHECK(true_objective(rnd, z) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("factorized point validation and default delta") {
  Matrix bad(2, 3);
  bad(0, 0) = 2.0;
  bad(1, 1) = 1.0;
  bad(0, 2) = 1.0;
  CHECK_THROWS(validate_factorized(FactorizedPoint{bad}));

  auto inst = identity_instance(Vector{1.0, 3.0});
  CHECK(default_delta(inst) == doctest::Approx(0.1 * (2.0 + 1.0)));
}
