#include "dcra/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace dcra {

namespace {

double chunk_sum(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i];
  return s;
}

double chunk_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

namespace ref {

double sum(std::span<const double> v) { return chunk_sum(v.data(), v.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
  check(a.size() == b.size(), "dot: size mismatch");
  return chunk_dot(a.data(), b.data(), a.size());
}

double norm2(std::span<const double> v) { return std::sqrt(chunk_dot(v.data(), v.data(), v.size())); }

void matvec(const Matrix& A, std::span<const double> x, std::span<double> y) {
  check(static_cast<int>(x.size()) == A.cols && static_cast<int>(y.size()) == A.rows, "matvec: size mismatch");
  for (int i = 0; i < A.rows; ++i) y[i] = chunk_dot(A.data.data() + static_cast<std::size_t>(i) * A.cols, x.data(), x.size());
}

void matvec_t(const Matrix& A, std::span<const double> y, std::span<double> x) {
  check(static_cast<int>(y.size()) == A.rows && static_cast<int>(x.size()) == A.cols, "matvec_t: size mismatch");
  for (int j = 0; j < A.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < A.rows; ++i) s += A(i, j) * y[i];
    x[j] = s;
  }
}

Matrix gram(const Matrix& V) {
  Matrix G(V.rows, V.rows);
  for (int i = 0; i < V.rows; ++i)
    for (int j = i; j < V.rows; ++j) {
      const double s = chunk_dot(V.data.data() + static_cast<std::size_t>(i) * V.cols,
                                 V.data.data() + static_cast<std::size_t>(j) * V.cols, V.cols);
      G(i, j) = s;
      G(j, i) = s;
    }
  return G;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  check(A.cols == B.rows, "matmul: inner dimensions differ");
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    double* crow = C.data.data() + static_cast<std::size_t>(i) * C.cols;
    for (int k = 0; k < A.cols; ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      const double* brow = B.data.data() + static_cast<std::size_t>(k) * B.cols;
      for (int j = 0; j < B.cols; ++j) crow[j] += a * brow[j];
    }
  }
  return C;
}

Matrix matmul_nt(const Matrix& A, const Matrix& B) {
  check(A.cols == B.cols, "matmul_nt: inner dimensions differ");
  Matrix C(A.rows, B.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.rows; ++j)
      C(i, j) = chunk_dot(A.data.data() + static_cast<std::size_t>(i) * A.cols,
                          B.data.data() + static_cast<std::size_t>(j) * B.cols, A.cols);
  return C;
}

}  // namespace ref

namespace par {

double sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n <= kReduceChunk) return chunk_sum(v.data(), n);
  const std::int64_t nchunks = static_cast<std::int64_t>((n + kReduceChunk - 1) / kReduceChunk);
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
    partial[static_cast<std::size_t>(c)] = chunk_sum(v.data() + lo, std::min(kReduceChunk, n - lo));
  }
  return chunk_sum(partial.data(), partial.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check(a.size() == b.size(), "dot: size mismatch");
  const std::size_t n = a.size();
  if (n <= kReduceChunk) return chunk_dot(a.data(), b.data(), n);
  const std::int64_t nchunks = static_cast<std::int64_t>((n + kReduceChunk - 1) / kReduceChunk);
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kReduceChunk;
    partial[static_cast<std::size_t>(c)] = chunk_dot(a.data() + lo, b.data() + lo, std::min(kReduceChunk, n - lo));
  }
  return chunk_sum(partial.data(), partial.size());
}

double norm2(std::span<const double> v) { return std::sqrt(par::dot(v, v)); }

void matvec(const Matrix& A, std::span<const double> x, std::span<double> y) {
  check(static_cast<int>(x.size()) == A.cols && static_cast<int>(y.size()) == A.rows, "matvec: size mismatch");
  const double* base = A.data.data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i)
    y[i] = chunk_dot(base + static_cast<std::size_t>(i) * A.cols, x.data(), x.size());
}

void matvec_t(const Matrix& A, std::span<const double> y, std::span<double> x) {
  check(static_cast<int>(y.size()) == A.rows && static_cast<int>(x.size()) == A.cols, "matvec_t: size mismatch");
#pragma omp parallel for schedule(static)
  for (int j = 0; j < A.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < A.rows; ++i) s += A(i, j) * y[i];
    x[j] = s;
  }
}

Matrix gram(const Matrix& V) {
  Matrix G(V.rows, V.rows);
  const double* base = V.data.data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < V.rows; ++i)
    for (int j = i; j < V.rows; ++j) {
      const double s = chunk_dot(base + static_cast<std::size_t>(i) * V.cols,
                                 base + static_cast<std::size_t>(j) * V.cols, V.cols);
      G(i, j) = s;
      G(j, i) = s;
    }
  return G;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  check(A.cols == B.rows, "matmul: inner dimensions differ");
  Matrix C(A.rows, B.cols);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i) {
    double* crow = C.data.data() + static_cast<std::size_t>(i) * C.cols;
    for (int k = 0; k < A.cols; ++k) {
      const double a = A(i, k);
      if (a == 0.0) continue;
      const double* brow = B.data.data() + static_cast<std::size_t>(k) * B.cols;
      for (int j = 0; j < B.cols; ++j) crow[j] += a * brow[j];
    }
  }
  return C;
}

Matrix matmul_nt(const Matrix& A, const Matrix& B) {
  check(A.cols == B.cols, "matmul_nt: inner dimensions differ");
  Matrix C(A.rows, B.rows);
  const double* abase = A.data.data();
  const double* bbase = B.data.data();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < B.rows; ++j)
      C(i, j) = chunk_dot(abase + static_cast<std::size_t>(i) * A.cols,
                          bbase + static_cast<std::size_t>(j) * B.cols, A.cols);
  return C;
}

}  // namespace par

SymEig sym_eig(const Matrix& S, int max_sweeps, double tol) {
  check(S.rows == S.cols, "sym_eig: matrix not square");
  const int n = S.rows;
  Matrix A = S;
  Matrix Q(n, n);
  for (int i = 0; i < n; ++i) Q(i, i) = 1.0;

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(A(i, i)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) scale = std::max(scale, std::abs(A(i, j)));
  if (scale == 0.0) scale = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * A(i, j) * A(i, j);
    if (std::sqrt(off) <= tol * scale * n) break;

    for (int pIdx = 0; pIdx < n - 1; ++pIdx)
      for (int q = pIdx + 1; q < n; ++q) {
        const double apq = A(pIdx, q);
        if (std::abs(apq) <= tol * scale * 1e-3) continue;
        const double app = A(pIdx, pIdx), aqq = A(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, pIdx), akq = A(k, q);
          A(k, pIdx) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(pIdx, k), aqk = A(q, k);
          A(pIdx, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double qkp = Q(k, pIdx), qkq = Q(k, q);
          Q(k, pIdx) = c * qkp - s * qkq;
          Q(k, q) = s * qkp + c * qkq;
        }
      }
  }

  // sort nonincreasing
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return A(a, a) > A(b, b); });

  SymEig out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = A(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = Q(i, order[static_cast<std::size_t>(j)]);
  }
  return out;
}

double spectral_norm_est(const Matrix& A, double tol, int max_iters) {
  check(A.rows >= 1 && A.cols >= 1, "spectral_norm_est: empty matrix");
  Vector x(static_cast<std::size_t>(A.cols), 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) x[static_cast<std::size_t>(j)] += std::abs(A(i, j));
  double xn = ref::norm2(x);
  if (xn == 0.0) return 0.0;
  for (auto& v : x) v /= xn;

  Vector y(static_cast<std::size_t>(A.rows)), z(static_cast<std::size_t>(A.cols));
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    par::matvec(A, x, y);
    par::matvec_t(A, y, z);
    const double next = ref::dot(x, z);  // Rayleigh quotient for A^T A
    const double zn = ref::norm2(z);
    if (zn == 0.0) return 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) x[j] = z[j] / zn;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

}  // namespace dcra
