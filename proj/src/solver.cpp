#include "dcra/solver.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "dcra/kernels.hpp"
#include "dcra/rng.hpp"

namespace dcra {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Everything the inner loop needs about the current iterate.
struct IterateCache {
  FactorizedPoint V;
  Vector residual;
  double ftilde = 0.0;
  Matrix grad;
  SpectralInfo spec;
  double gap = 0.0;

  double phi(double rho) const { return ftilde + rho * gap; }
};

IterateCache make_cache(const SmoothedObjective& obj, FactorizedPoint V) {
  IterateCache c;
  c.V = std::move(V);
  c.residual = lifted_residual(*obj.inst, c.V);
  c.ftilde = envelope(obj.inst->loss, c.residual, obj.delta);
  c.grad = smoothed_gradient(obj, c.V);
  c.spec = leading_pair(c.V.V);
  c.gap = rank_one_gap(c.V.V, c.spec);
  return c;
}

// argmin over S of <grad + rho*Gamma - L V, .>, solved in closed form by
// column normalization; Gamma is reconstructed from (sigma1, q1, p1) as
// -2 sigma1 q1 p1^T.
FactorizedPoint closed_form_step(const IterateCache& c, double rho, double L) {
  const Matrix& V = c.V.V;
  const int m = V.rows, p = V.cols;
  const double scale = 1.0 / (2.0 * rho + L);
  Matrix M(m, p);
  for (int i = 0; i < m; ++i) {
    const double* vrow = V.data.data() + static_cast<std::size_t>(i) * p;
    const double* grow = c.grad.data.data() + static_cast<std::size_t>(i) * p;
    double* mrow = M.data.data() + static_cast<std::size_t>(i) * p;
    const double gamma_row = -2.0 * c.spec.sigma1 * c.spec.q1[static_cast<std::size_t>(i)];
    for (int j = 0; j < p; ++j)
      mrow[j] = scale * (L * vrow[j] - grow[j] - rho * gamma_row * c.spec.p1[static_cast<std::size_t>(j)]);
  }
  return project_columns(M);
}

double frobenius_dist_sq(const Matrix& A, const Matrix& B) {
  double s = 0.0;
  for (std::size_t i = 0; i < A.data.size(); ++i) {
    const double d = A.data[i] - B.data[i];
    s += d * d;
  }
  return s;
}

struct InnerLoopOpts {
  double rho = 0.0;
  double eps_inner = 1e-6;
  int l_max = 2000;
  int k_tag = 0;
  int halve_every = 10;
  bool record = false;
};

constexpr double kLFloor = 1e-8;
constexpr double kLCeil = 1e16;

InnerResult run_inner(const SmoothedObjective& obj, IterateCache& cache, double& L, const InnerLoopOpts& opt) {
  InnerResult out;
  out.phi0 = cache.phi(opt.rho);
  int streak = 0;

  for (int l = 0; l < opt.l_max; ++l) {
    FactorizedPoint cand;
    Vector cand_res;
    double cand_ft = 0.0, dn2 = 0.0, inner_prod = 0.0;
    while (true) {
      cand = closed_form_step(cache, opt.rho, L);
      cand_res = lifted_residual(*obj.inst, cand);
      cand_ft = envelope(obj.inst->loss, cand_res, obj.delta);
      dn2 = frobenius_dist_sq(cand.V, cache.V.V);
      inner_prod = 0.0;
      for (std::size_t i = 0; i < cand.V.data.size(); ++i)
        inner_prod += cache.grad.data[i] * (cand.V.data[i] - cache.V.V.data[i]);
      const double slack = 1e-12 * (1.0 + std::abs(cache.ftilde));
      if (cand_ft <= cache.ftilde + inner_prod + 0.5 * L * dn2 + slack || L >= kLCeil) break;
      L *= 2.0;
      streak = 0;
    }

    const double step_norm = std::sqrt(dn2);
    const double curv = dn2 > 0.0 ? 2.0 * (cand_ft - cache.ftilde - inner_prod) / dn2 : 0.0;

    IterateCache next;
    next.V = std::move(cand);
    next.residual = std::move(cand_res);
    next.ftilde = cand_ft;
    next.grad = smoothed_gradient(obj, next.V);
    next.spec = leading_pair(next.V.V);
    next.gap = rank_one_gap(next.V.V, next.spec);

    const double grad_diff = std::sqrt(frobenius_dist_sq(next.grad, cache.grad));
    const double surrogate = grad_diff + L * step_norm;
    const double phi_prev = cache.phi(opt.rho);

    cache = std::move(next);
    out.iters = l + 1;
    out.last_step_norm = step_norm;
    out.sum_sq_steps += dn2;
    out.last_surrogate = surrogate;
    if (opt.record)
      out.rows.push_back({opt.k_tag, l, L, phi_prev, cache.phi(opt.rho), step_norm, curv, surrogate});

    ++streak;
    if (opt.halve_every > 0 && streak >= opt.halve_every) {
      L = std::max(L / 2.0, kLFloor);
      streak = 0;
    }

    if (step_norm <= opt.eps_inner) {
      out.status = InnerStatus::Converged;
      out.phi = cache.phi(opt.rho);
      out.L = L;
      return out;
    }
  }
  out.status = out.last_step_norm > 10.0 * opt.eps_inner ? InnerStatus::Stalled : InnerStatus::LMaxReached;
  out.phi = cache.phi(opt.rho);
  out.L = L;
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  check(m >= 2, "config: m must be >= 2");
  if (rho0) check(*rho0 > 0.0, "config: rho0 must be positive");
  check(sigma > 1.0, "config: sigma must exceed 1");
  check(rho_max > 0.0, "config: rho_max must be positive");
  if (rho0) check(*rho0 <= rho_max, "config: need rho0 <= rho_max");
  if (delta) check(*delta > 0.0, "config: delta must be positive");
  check(eps_outer > 0.0 && eps_outer < 1.0, "config: eps_outer must lie in (0,1)");
  check(eps_inner > 0.0, "config: eps_inner must be positive");
  check(k_max >= 0, "config: k_max must be nonnegative");
  check(l_max >= 1, "config: l_max must be >= 1");
  if (L_init) check(*L_init > 0.0, "config: L_init must be positive");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::GapReached: return "GapReached";
    case Termination::KMaxExceeded: return "KMaxExceeded";
    case Termination::InnerStall: return "InnerStall";
  }
  return "?";
}

FactorizedPoint project_columns(const Matrix& M) {
  check(M.rows >= 1 && M.cols >= 1, "project_columns: empty matrix");
  Matrix out(M.rows, M.cols);
  for (int j = 0; j < M.cols; ++j) {
    double sq = 0.0;
    for (int i = 0; i < M.rows; ++i) sq += M(i, j) * M(i, j);
    const double norm = std::sqrt(sq);
    if (!(norm > 1e-150))
      throw std::runtime_error("project_columns: column " + std::to_string(j) + " is numerically zero");
    for (int i = 0; i < M.rows; ++i) out(i, j) = M(i, j) / norm;
  }
  return FactorizedPoint{std::move(out)};
}

FactorizedPoint inner_step(const SmoothedObjective& obj, const FactorizedPoint& V, double L) {
  check(L > 0.0, "inner_step: L must be positive");
  IterateCache c;
  c.V = V;
  c.grad = smoothed_gradient(obj, V);   // exactly one gradient evaluation
  c.spec = leading_pair(V.V);           // exactly one spectral evaluation
  return closed_form_step(c, obj.rho, L);
}

InnerResult solve_inner(const SmoothedObjective& obj, const FactorizedPoint& V0, const SolverConfig& cfg) {
  cfg.validate();
  validate_factorized(V0);
  IterateCache cache = make_cache(obj, V0);
  double L = cfg.L_init ? *cfg.L_init : auto_curvature_init(*obj.inst, obj.delta);
  InnerLoopOpts opt;
  opt.rho = obj.rho;
  opt.eps_inner = cfg.eps_inner;
  opt.l_max = cfg.l_max;
  opt.halve_every = cfg.l_halve_every;
  opt.record = true;
  InnerResult res = run_inner(obj, cache, L, opt);
  res.V = std::move(cache.V);
  return res;
}

SolveResult solve(const ProblemInstance& inst, const SolverConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();
  const double delta = cfg.delta ? *cfg.delta : default_delta(inst);
  const int p = inst.n + 1;
  check(cfg.m <= p, "config: m must be <= n+1");

  OuterTrace trace;
  trace.delta_used = delta;

  FactorizedPoint V = initial_point(cfg.m, p, cfg.seed);
  double L = cfg.L_init ? *cfg.L_init : auto_curvature_init(inst, delta);

  double rho = std::min(cfg.rho0 ? *cfg.rho0 : auto_rho0(inst), cfg.rho_max);
  SmoothedObjective obj(inst, delta, rho);
  IterateCache cache = make_cache(obj, std::move(V));
  trace.iterates.push_back({cache.ftilde, cache.spec.sigma1 * cache.spec.sigma1, numerical_rank(cache.V.V)});

  long l_total = 0;
  bool done = false;
  bool warned_p1 = false;
  for (int k = 0; k <= cfg.k_max && !done; ++k) {
    const auto t_outer = Clock::now();
    obj.rho = rho;

    InnerLoopOpts opt;
    opt.rho = rho;
    opt.eps_inner = cfg.eps_inner;
    opt.l_max = cfg.l_max;
    opt.k_tag = k;
    opt.halve_every = cfg.l_halve_every;
    opt.record = cfg.record_inner;
    InnerResult inner = run_inner(obj, cache, L, opt);
    if (cfg.record_inner)
      trace.inner_rows.insert(trace.inner_rows.end(), inner.rows.begin(), inner.rows.end());

    l_total += inner.iters;
    const double gap = cache.gap;  // fresh: cache was rebuilt at the accepted iterate
    double min_abs_p1 = 1.0;
    for (double v : cache.spec.p1) min_abs_p1 = std::min(min_abs_p1, std::abs(v));
    if (min_abs_p1 < 1e-12 && !warned_p1) {
      warned_p1 = true;
      std::cerr << "dcra: warning: leading eigenvector has a near-zero entry (min |P1_j| = " << min_abs_p1
                << " at outer k=" << k << "); column projection margins may degrade\n";
    }

    OuterRow row;
    row.k = k;
    row.rho = rho;
    row.inner_iters = inner.iters;
    row.l_total = l_total;
    row.gap = gap;
    row.phi = cache.phi(rho);
    row.ftilde = cache.ftilde;
    row.sigma1_sq = cache.spec.sigma1 * cache.spec.sigma1;
    row.rank = numerical_rank(cache.V.V);
    row.surrogate = inner.last_surrogate;
    row.min_abs_p1 = min_abs_p1;
    row.seconds = seconds_since(t_outer);
    row.inner_status = inner.status;
    trace.rows.push_back(row);
    trace.iterates.push_back({cache.ftilde, row.sigma1_sq, row.rank});

    trace.rho_final = std::min(cfg.sigma * rho, cfg.rho_max);
    if (gap <= cfg.eps_outer) {
      trace.termination = Termination::GapReached;
      done = true;
    } else if (k == cfg.k_max) {
      trace.termination = inner.status == InnerStatus::Stalled ? Termination::InnerStall : Termination::KMaxExceeded;
      done = true;
    } else {
      rho = std::min(cfg.sigma * rho, cfg.rho_max);
    }
  }

  if (trace.termination != Termination::GapReached && cfg.rho_max >= 1e4 && !trace.rows.empty() &&
      trace.rows.back().rho >= cfg.rho_max && trace.rows.back().gap > cfg.eps_outer)
    std::cerr << "dcra: warning: gap " << trace.rows.back().gap << " still above eps_outer at rho_max\n";

  trace.L_final = L;
  trace.total_seconds = seconds_since(t_start);
  return {std::move(cache.V), std::move(trace)};
}

double stationarity_surrogate(const SmoothedObjective& obj, const FactorizedPoint& V_prev,
                              const FactorizedPoint& V_next, double L) {
  const Matrix g_prev = smoothed_gradient(obj, V_prev);
  const Matrix g_next = smoothed_gradient(obj, V_next);
  return std::sqrt(frobenius_dist_sq(g_next, g_prev)) + L * std::sqrt(frobenius_dist_sq(V_next.V, V_prev.V));
}

FactorizedPoint initial_point(int m, int p, std::uint64_t seed) {
  check(m >= 2 && m <= p, "initial_point: need 2 <= m <= p");
  for (std::uint64_t attempt = 0;; ++attempt) {
    check(attempt < 64, "initial_point: could not draw a full-rank start");
    Rng rng = Rng::derived(seed, attempt);
    Matrix M(m, p);
    for (auto& v : M.data) v = rng.normal();
    bool zero_col = false;
    for (int j = 0; j < p && !zero_col; ++j) {
      double sq = 0.0;
      for (int i = 0; i < m; ++i) sq += M(i, j) * M(i, j);
      zero_col = !(sq > 0.0);
    }
    if (zero_col) continue;
    FactorizedPoint P = project_columns(M);
    if (numerical_rank(P.V) == m) return P;
  }
}

double rank_one_gap(const Matrix& V, const SpectralInfo& info) {
  double s = 0.0;
  for (int i = 0; i < V.rows; ++i) {
    const double qi = info.sigma1 * info.q1[static_cast<std::size_t>(i)];
    const double* row = V.data.data() + static_cast<std::size_t>(i) * V.cols;
    for (int j = 0; j < V.cols; ++j) {
      const double d = row[j] - qi * info.p1[static_cast<std::size_t>(j)];
      s += d * d;
    }
  }
  return s;
}

double auto_curvature_init(const ProblemInstance& inst, double delta) {
  Vector col_sum(static_cast<std::size_t>(inst.n), 0.0);
  double row_max = 0.0;
  for (int i = 0; i < inst.r; ++i) {
    double rs = 0.0;
    for (int j = 0; j < inst.n; ++j) {
      const double a = std::abs(inst.A(i, j));
      rs += a;
      col_sum[static_cast<std::size_t>(j)] += a;
    }
    row_max = std::max(row_max, rs);
  }
  double col_max = 0.0;
  for (double v : col_sum) col_max = std::max(col_max, v);
  return std::max(4.0 * col_max * row_max / delta, 1e-8);
}

double auto_rho0(const ProblemInstance& inst) {
  double total = 0.0;
  for (int j = 0; j < inst.n; ++j) {
    double sq = 0.0;
    for (int i = 0; i < inst.r; ++i) sq += inst.A(i, j) * inst.A(i, j);
    total += std::sqrt(sq);
  }
  return std::max(0.05 * total / inst.n, 1e-6);
}

int numerical_rank(const Matrix& V, double rel_cutoff) {
  const SymEig eig = sym_eig(par::gram(V));
  const double top = std::sqrt(std::max(eig.values[0], 0.0));
  if (top == 0.0) return 0;
  int rank = 0;
  for (double lam : eig.values)
    if (std::sqrt(std::max(lam, 0.0)) > rel_cutoff * top) ++rank;
  return rank;
}

}  // namespace dcra
