#include "dcra/rounding.hpp"

#include <algorithm>
#include <cmath>

#include "dcra/kernels.hpp"

namespace dcra {

Vector rank_one_project(const FactorizedPoint& V) {
  const SpectralInfo info = leading_pair(V.V);
  Vector x(info.p1.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = info.sigma1 * info.p1[j];
  return x;
}

std::vector<int> sign_round(const Vector& x_bar) {
  check(x_bar.size() >= 2, "sign_round: need at least the homogenization coordinate plus one");
  const double x0 = x_bar[0];
  if (x0 == 0.0) throw std::runtime_error("sign_round: homogenization coordinate is zero");
  std::vector<int> z(x_bar.size() - 1);
  for (std::size_t j = 1; j < x_bar.size(); ++j) {
    const double v = x_bar[j] / x0;
    z[j - 1] = v < 0.0 ? -1 : 1;  // exact zero rounds to +1
  }
  return z;
}

double feasibility_gap(const Vector& x_bar) {
  double s = 0.0;
  for (double v : x_bar) {
    const double d = v * v - 1.0;
    s += d * d;
  }
  return std::sqrt(s);
}

int select_k_star(const OuterTrace& trace) {
  check(trace.iterates.size() >= 2, "select_k_star: trace has no completed outer iteration");
  const int k_bar = static_cast<int>(trace.iterates.size()) - 1;
  int best = 0;
  for (int k = 1; k < k_bar; ++k)
    if (trace.iterates[static_cast<std::size_t>(k)].ftilde < trace.iterates[static_cast<std::size_t>(best)].ftilde)
      best = k;
  return best;
}

BoundBreakdown optimality_bound(const OuterTrace& trace, int p, int k_star, double L_fhat, double eps) {
  const int k_bar = static_cast<int>(trace.iterates.size()) - 1;
  check(k_bar >= 1, "optimality_bound: trace has no completed outer iteration");
  check(k_star >= 0 && k_star < k_bar, "optimality_bound: k_star must lie in [0, k_bar)");
  check(static_cast<int>(trace.rows.size()) == k_bar, "optimality_bound: malformed trace");

  BoundBreakdown out;
  auto& in = out.inputs;
  in.k_star = k_star;
  in.k_bar = k_bar;
  in.rho_k_star = trace.rows[static_cast<std::size_t>(k_star)].rho;
  in.rho_k_bar = trace.rho_final;
  in.r_star = trace.iterates[static_cast<std::size_t>(k_star)].rank;
  check(in.r_star >= 1, "optimality_bound: rank of V^{k*} missing");
  in.L_fhat = L_fhat;
  in.eps = eps;
  in.ftilde_k_star = trace.iterates[static_cast<std::size_t>(k_star)].ftilde;

  const double pf = static_cast<double>(p);
  out.simple = in.rho_k_bar * (pf - 1.0) + in.rho_k_star * (1.0 - pf / in.r_star) + (L_fhat - in.rho_k_bar) * eps;

  // rho_j for j = k_star..k_bar; index k_bar takes the schedule value
  auto rho_at = [&](int j) {
    return j < k_bar ? trace.rows[static_cast<std::size_t>(j)].rho : trace.rho_final;
  };
  double telescoped = in.rho_k_bar * trace.iterates[static_cast<std::size_t>(k_bar)].sigma1_sq -
                      in.rho_k_star * pf / in.r_star + L_fhat * eps;
  for (int j = k_star; j < k_bar; ++j)
    telescoped += (rho_at(j) - rho_at(j + 1)) * trace.iterates[static_cast<std::size_t>(j + 1)].sigma1_sq;
  out.telescoped = telescoped;
  return out;
}

double lipschitz_fhat_estimate(const ProblemInstance& inst) {
  return spectral_norm_est(inst.A) / std::sqrt(2.0) * loss_lipschitz_bound(inst.loss);
}

Certificate certify(const ProblemInstance& inst, const FactorizedPoint& V, const OuterTrace& trace,
                    double eps_outer) {
  Certificate cert;
  cert.x_bar = rank_one_project(V);
  cert.z = sign_round(cert.x_bar);
  cert.feas_gap = feasibility_gap(cert.x_bar);
  cert.true_obj = true_objective(inst, cert.z);

  // A(x_bar x_bar^T) = A * (x_bar_0 * x_bar_{1..n})
  Vector scaled(static_cast<std::size_t>(inst.n));
  for (int j = 0; j < inst.n; ++j) scaled[static_cast<std::size_t>(j)] = cert.x_bar[0] * cert.x_bar[static_cast<std::size_t>(j) + 1];
  Vector res(static_cast<std::size_t>(inst.r));
  par::matvec(inst.A, scaled, res);
  for (int i = 0; i < inst.r; ++i) res[static_cast<std::size_t>(i)] -= inst.b[static_cast<std::size_t>(i)];
  cert.env_obj_rounded = envelope(inst.loss, res, trace.delta_used);

  const double L_fhat = lipschitz_fhat_estimate(inst);
  const int k_star = select_k_star(trace);
  // the bound needs the realized rank-one defect; at normal termination the
  // recorded gap is below eps_outer and the tolerance applies as stated
  const double eps_used = std::max(eps_outer, trace.rows.empty() ? 0.0 : trace.rows.back().gap);
  const BoundBreakdown bounds = optimality_bound(trace, inst.n + 1, k_star, L_fhat, eps_used);
  cert.gap_bound = bounds.simple;
  cert.gap_bound_telescoped = bounds.telescoped;
  cert.bound_inputs = bounds.inputs;
  return cert;
}

std::vector<DescentSegment> descent_certificate(const std::vector<InnerTraceRow>& rows) {
  check(!rows.empty(), "descent_certificate: empty inner trace");
  std::vector<DescentSegment> segments;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j + 1 < rows.size() && rows[j + 1].k == rows[i].k && rows[j + 1].L == rows[i].L) ++j;

    DescentSegment seg;
    seg.k = rows[i].k;
    seg.first_l = rows[i].l;
    seg.last_l = rows[j].l;
    seg.L = rows[i].L;
    seg.L_est = rows[i].curvature;
    for (std::size_t t = i; t <= j; ++t) {
      seg.L_est = std::max(seg.L_est, rows[t].curvature);
      seg.sum_sq_steps += rows[t].step_norm * rows[t].step_norm;
    }
    seg.evaluable = seg.L_est < seg.L;
    if (seg.evaluable) {
      seg.bound = 2.0 * (rows[i].phi_prev - rows[j].phi) / (seg.L - seg.L_est);
      seg.slack = seg.bound - seg.sum_sq_steps;
      seg.holds = seg.sum_sq_steps <= seg.bound + 1e-9 * (1.0 + std::abs(seg.bound));
    }
    segments.push_back(seg);
    i = j + 1;
  }
  return segments;
}

}  // namespace dcra
