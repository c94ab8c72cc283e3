#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dcra/kernels.hpp"
#include "dcra/rng.hpp"
#include "test_util.hpp"

using namespace dcra;

TEST_CASE("parallel matvec and gram match the serial reference bit for bit") {
  const Matrix A = testutil::random_matrix(37, 113, 1);
  Vector x(113);
  Rng rng(2);
  for (auto& v : x) v = rng.normal();

  Vector y_ref(37), y_par(37);
  ref::matvec(A, x, y_ref);
  par::matvec(A, x, y_par);
  CHECK(y_ref == y_par);

  Vector xt_ref(113), xt_par(113);
  Vector y(37);
  for (auto& v : y) v = rng.normal();
  ref::matvec_t(A, y, xt_ref);
  par::matvec_t(A, y, xt_par);
  CHECK(xt_ref == xt_par);

  const Matrix V = testutil::random_matrix(6, 200, 3);
  CHECK(ref::gram(V) == par::gram(V));
  const Matrix B = testutil::random_matrix(113, 23, 4);
  CHECK(ref::matmul(A, B) == par::matmul(A, B));
  const Matrix C = testutil::random_matrix(9, 113, 5);
  CHECK(ref::matmul_nt(A, C) == par::matmul_nt(A, C));
}

TEST_CASE("chunked reductions agree with the reference within roundoff") {
  Rng rng(7);
  Vector v(50'000), w(50'000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = rng.normal();
    w[i] = rng.normal();
  }
  CHECK(par::sum(v) == doctest::Approx(ref::sum(v)).epsilon(1e-12));
  CHECK(par::dot(v, w) == doctest::Approx(ref::dot(v, w)).epsilon(1e-12));
  CHECK(par::norm2(v) == doctest::Approx(ref::norm2(v)).epsilon(1e-12));
}

#ifdef _OPENMP
TEST_CASE("parallel reductions do not depend on the thread count") {
  Rng rng(8);
  Vector v(30'000), w(30'000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = rng.normal();
    w[i] = rng.normal();
  }
  const int prev = omp_get_max_threads();
  omp_set_num_threads(1);
  const double s1 = par::sum(v), d1 = par::dot(v, w);
  omp_set_num_threads(7);
  const double s7 = par::sum(v), d7 = par::dot(v, w);
  omp_set_num_threads(prev);
  CHECK(s1 == s7);
  CHECK(d1 == d7);
}
#endif

TEST_CASE("sym_eig reproduces Eigen on random symmetric matrices") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    Matrix M = testutil::random_matrix(n, n, 100 + seed);
    Matrix S(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) S(i, j) = 0.5 * (M(i, j) + M(j, i));

    const SymEig eig = sym_eig(S);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(testutil::to_eigen(S));
    for (int i = 0; i < n; ++i)
      CHECK(eig.values[static_cast<std::size_t>(i)] ==
            doctest::Approx(es.eigenvalues()(n - 1 - i)).epsilon(1e-10));
    // eigenvector residual ||S v - lambda v||
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double sv = 0.0;
        for (int t = 0; t < n; ++t) sv += S(i, t) * eig.vectors(t, j);
        CHECK(sv == doctest::Approx(eig.values[static_cast<std::size_t>(j)] * eig.vectors(i, j)).epsilon(1e-8).scale(1.0));
      }
    }
  }
}

TEST_CASE("spectral norm estimate matches Eigen") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix A = testutil::random_matrix(5 + static_cast<int>(seed), 8, 200 + seed);
    const double est = spectral_norm_est(A);
    const double exact = testutil::full_svd(A).sigma1;
    CHECK(est == doctest::Approx(exact).epsilon(1e-6));
  }
}
