#include "dcra/model.hpp"

#include <algorithm>
#include <cmath>

#include "dcra/kernels.hpp"

namespace dcra {

ProblemInstance make_instance(Matrix A, Vector b, SeparableLoss loss, std::string label) {
  ProblemInstance inst;
  inst.n = A.cols;
  inst.r = A.rows;
  check(inst.n >= 1 && inst.r >= 1, "instance: A must be nonempty");
  check(static_cast<int>(b.size()) == inst.r, "instance: b length must equal rows(A)");
  check(loss.total_rows == inst.r, "instance: loss.total_rows must equal rows(A)");
  for (double v : A.data) check(std::isfinite(v), "instance: A has a non-finite entry");
  for (double v : b) check(std::isfinite(v), "instance: b has a non-finite entry");
  inst.A = std::move(A);
  inst.b = std::move(b);
  inst.loss = std::move(loss);
  inst.label = std::move(label);
  return inst;
}

void validate_factorized(const FactorizedPoint& P, double tol) {
  const int m = P.m(), p = P.p();
  check(m >= 2, "factorized point: m must be >= 2");
  check(m <= p, "factorized point: m must be <= p");
  for (int j = 0; j < p; ++j) {
    double sq = 0.0;
    for (int i = 0; i < m; ++i) sq += P.V(i, j) * P.V(i, j);
    check(std::abs(std::sqrt(sq) - 1.0) <= tol, "factorized point: column " + std::to_string(j) + " is not unit norm");
  }
}

SmoothedObjective::SmoothedObjective(const ProblemInstance& instance, double delta_, double rho_)
    : inst(&instance), delta(delta_), rho(rho_) {
  check(delta > 0.0, "smoothed objective: delta must be positive");
  check(rho >= 0.0, "smoothed objective: rho must be nonnegative");
}

Vector lifted_residual(const ProblemInstance& inst, const FactorizedPoint& P) {
  check(P.p() == inst.n + 1, "lifted_residual: V must have n+1 columns");
  const Matrix& V = P.V;
  const int m = P.m(), n = inst.n;
  // u_j = <V_j, V_0>; m is small, so a row-outer pass stays contiguous.
  Vector u(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    const double vi0 = V(i, 0);
    const double* row = V.data.data() + static_cast<std::size_t>(i) * V.cols;
    for (int j = 0; j < n; ++j) u[static_cast<std::size_t>(j)] += row[j + 1] * vi0;
  }
  Vector res(static_cast<std::size_t>(inst.r));
  par::matvec(inst.A, u, res);
  for (int i = 0; i < inst.r; ++i) res[static_cast<std::size_t>(i)] -= inst.b[static_cast<std::size_t>(i)];
  return res;
}

SpectralInfo leading_pair(const Matrix& V, double tol, int max_sweeps) {
  const int m = V.rows, p = V.cols;
  check(m >= 1 && p >= 1, "leading_pair: empty matrix");
  const Matrix G = par::gram(V);

  Vector q(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) q[static_cast<std::size_t>(i)] += G(i, j);
  double qn = ref::norm2(q);
  if (qn <= 0.0) {
    for (int i = 0; i < m; ++i) q[static_cast<std::size_t>(i)] = G(i, i);
    qn = ref::norm2(q);
    check(qn > 0.0, "leading_pair: zero matrix");
  }
  for (auto& v : q) v /= qn;

  SpectralInfo out;
  Vector z(static_cast<std::size_t>(m));
  double lambda = 0.0;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += G(i, j) * q[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(i)] = s;
    }
    lambda = ref::dot(q, z);
    double rsq = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = z[static_cast<std::size_t>(i)] - lambda * q[static_cast<std::size_t>(i)];
      rsq += d * d;
    }
    out.sweeps = sweep + 1;
    if (std::sqrt(rsq) <= tol * std::max(lambda, 1e-300)) {
      converged = true;
      break;
    }
    const double zn = ref::norm2(z);
    check(zn > 0.0, "leading_pair: power iteration collapsed");
    for (int i = 0; i < m; ++i) q[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / zn;
  }
  if (!converged) {
    // flat leading spectrum; any vector in the top eigenspace works
    out.degenerate = true;
    const SymEig eig = sym_eig(G);
    lambda = eig.values[0];
    for (int i = 0; i < m; ++i) q[static_cast<std::size_t>(i)] = eig.vectors(i, 0);
  }

  out.sigma1 = std::sqrt(std::max(lambda, 0.0));
  check(out.sigma1 > 0.0, "leading_pair: zero leading singular value");
  out.q1 = q;
  out.p1.assign(static_cast<std::size_t>(p), 0.0);
  for (int i = 0; i < m; ++i) {
    const double qi = q[static_cast<std::size_t>(i)] / out.sigma1;
    const double* row = V.data.data() + static_cast<std::size_t>(i) * V.cols;
    for (int j = 0; j < p; ++j) out.p1[static_cast<std::size_t>(j)] += row[j] * qi;
  }
  const double pn = ref::norm2(out.p1);
  for (auto& v : out.p1) v /= pn;

  // deterministic sign: homogenization coordinate nonnegative
  double lead = out.p1[0];
  if (lead == 0.0)
    for (double v : out.p1)
      if (v != 0.0) {
        lead = v;
        break;
      }
  if (lead < 0.0) {
    for (auto& v : out.p1) v = -v;
    for (auto& v : out.q1) v = -v;
  }
  return out;
}

SpectralSubgradient spectral_subgradient(const FactorizedPoint& P) {
  const SpectralInfo info = leading_pair(P.V);
  const int m = P.m(), p = P.p();
  SpectralSubgradient out;
  out.sigma1 = info.sigma1;
  out.p1 = info.p1;
  out.degenerate = info.degenerate;
  // Gamma = -2 (V p1) p1^T = -2 sigma1 q1 p1^T
  out.gamma = Matrix(m, p);
  Vector vp(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) {
    const double* row = P.V.data.data() + static_cast<std::size_t>(i) * p;
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += row[j] * info.p1[static_cast<std::size_t>(j)];
    vp[static_cast<std::size_t>(i)] = s;
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) out.gamma(i, j) = -2.0 * vp[static_cast<std::size_t>(i)] * info.p1[static_cast<std::size_t>(j)];
  return out;
}

double smoothed_value(const SmoothedObjective& obj, const FactorizedPoint& P) {
  const Vector res = lifted_residual(*obj.inst, P);
  const double ftilde = envelope(obj.inst->loss, res, obj.delta);
  if (obj.rho == 0.0) return ftilde;
  const SpectralInfo info = leading_pair(P.V);
  const double fro2 = frobenius_norm_sq(P.V);
  return ftilde + obj.rho * (fro2 - info.sigma1 * info.sigma1);
}

Matrix smoothed_gradient(const SmoothedObjective& obj, const FactorizedPoint& P) {
  const Vector res = lifted_residual(*obj.inst, P);
  Vector g(res.size());
  envelope_gradient(obj.inst->loss, res, obj.delta, g);
  Vector w(static_cast<std::size_t>(obj.inst->n));
  par::matvec_t(obj.inst->A, g, w);

  const Matrix& V = P.V;
  const int m = P.m(), p = P.p(), n = obj.inst->n;
  Matrix grad(m, p);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* row = V.data.data() + static_cast<std::size_t>(i) * p;
    double* grow = grad.data.data() + static_cast<std::size_t>(i) * p;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += row[j + 1] * w[static_cast<std::size_t>(j)];
    grow[0] = s;
    const double vi0 = row[0];
    for (int j = 0; j < n; ++j) grow[j + 1] = w[static_cast<std::size_t>(j)] * vi0;
  }
  return grad;
}

double true_objective(const ProblemInstance& inst, const std::vector<int>& z) {
  check(static_cast<int>(z.size()) == inst.n, "true_objective: z length must equal n");
  Vector zd(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    check(z[j] == 1 || z[j] == -1, "true_objective: entries must be +-1");
    zd[j] = static_cast<double>(z[j]);
  }
  Vector res(static_cast<std::size_t>(inst.r));
  par::matvec(inst.A, zd, res);
  for (int i = 0; i < inst.r; ++i) res[static_cast<std::size_t>(i)] -= inst.b[static_cast<std::size_t>(i)];
  return loss_value(inst.loss, res);
}

double default_delta(const ProblemInstance& inst) {
  Vector mags(inst.b.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(inst.b[i]);
  std::sort(mags.begin(), mags.end());
  const std::size_t n = mags.size();
  const double median = (n % 2 == 1) ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
  return 0.1 * (median + 1.0);
}

double frobenius_norm_sq(const Matrix& M) { return par::dot(M.data, M.data); }

}  // namespace dcra
