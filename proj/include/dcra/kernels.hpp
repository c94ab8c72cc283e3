#pragma once

#include <span>

#include "dcra/core.hpp"

// Dense kernels used by the solver hot loops. Two implementations share one
// contract: dcra::ref is the plain serial reference, dcra::par is the
// OpenMP-parallel version used in production. Reductions in par:: accumulate
// fixed-size chunks and combine the partials in index order, so results do
// not depend on the number of threads. Elementwise and per-row kernels are
// bit-identical between ref:: and par::.

namespace dcra {

inline constexpr std::size_t kReduceChunk = 4096;

namespace ref {

double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

// y = A x
void matvec(const Matrix& A, std::span<const double> x, std::span<double> y);
// x = A^T y
void matvec_t(const Matrix& A, std::span<const double> y, std::span<double> x);
// G = V V^T (m x m from m x p)
Matrix gram(const Matrix& V);
// C = A B
Matrix matmul(const Matrix& A, const Matrix& B);
// C = A B^T
Matrix matmul_nt(const Matrix& A, const Matrix& B);

}  // namespace ref

namespace par {

double sum(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

void matvec(const Matrix& A, std::span<const double> x, std::span<double> y);
void matvec_t(const Matrix& A, std::span<const double> y, std::span<double> x);
Matrix gram(const Matrix& V);
Matrix matmul(const Matrix& A, const Matrix& B);
Matrix matmul_nt(const Matrix& A, const Matrix& B);

}  // namespace par

// Cyclic Jacobi eigensolver for small symmetric matrices (the m x m Gram
// factors; m stays well below 100). Eigenvalues returned in nonincreasing
// order; eigvecs column j pairs with eigenvalue j.
struct SymEig {
  Vector values;
  Matrix vectors;
};
SymEig sym_eig(const Matrix& S, int max_sweeps = 64, double tol = 1e-13);

// ||A||_2 via deterministic power iteration on A^T A.
double spectral_norm_est(const Matrix& A, double tol = 1e-8, int max_iters = 300);

}  // namespace dcra
