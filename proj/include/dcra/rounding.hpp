#pragma once

#include <vector>

#include "dcra/solver.hpp"

// Rank-one projection of the solver output, sign rounding, and the
// optimality-gap certificate assembled from the outer trace.

namespace dcra {

// x_bar = sigma1(V) * P1, homogenization coordinate nonnegative.
Vector rank_one_project(const FactorizedPoint& V);

// z_j = sign(x_bar_j / x_bar_0) for j = 1..p-1; exact zeros round to +1.
// Throws when the homogenization coordinate is zero.
std::vector<int> sign_round(const Vector& x_bar);

// ||x_bar o x_bar - e||_2
double feasibility_gap(const Vector& x_bar);

struct GapBoundInputs {
  int k_star = 0;
  int k_bar = 0;        // number of inner solves performed
  double rho_k_bar = 0.0;
  double rho_k_star = 0.0;
  int r_star = 0;       // numerical rank of V^{k*}
  double L_fhat = 0.0;
  double eps = 0.0;
  double ftilde_k_star = 0.0;
};

struct BoundBreakdown {
  // rho_kbar (p-1) + rho_k* (1 - p/r*) + (L_fhat - rho_kbar) eps
  double simple = 0.0;
  // rho_kbar |V^kbar|^2 - rho_k* p/r* + sum (rho_j - rho_{j+1}) |V^{j+1}|^2
  // + L_fhat eps, bounding env-obj(x_bar x_bar^T) - f~(V^{k*})
  double telescoped = 0.0;
  GapBoundInputs inputs;
};

BoundBreakdown optimality_bound(const OuterTrace& trace, int p, int k_star, double L_fhat, double eps);

// outer index (< k_bar) minimizing the recorded f~(V^k); the bound holds for
// any of them, so pick the most favorable.
int select_k_star(const OuterTrace& trace);

// Lipschitz estimate for the lifted envelope objective:
// spectral_norm(A)/sqrt(2) * loss_lipschitz_bound.
double lipschitz_fhat_estimate(const ProblemInstance& inst);

struct Certificate {
  Vector x_bar;
  std::vector<int> z;
  double feas_gap = 0.0;
  double env_obj_rounded = 0.0;  // envelope objective at x_bar x_bar^T
  double true_obj = 0.0;         // f(A z - b) at the rounded sign vector
  double gap_bound = 0.0;
  double gap_bound_telescoped = 0.0;
  GapBoundInputs bound_inputs;
};

Certificate certify(const ProblemInstance& inst, const FactorizedPoint& V, const OuterTrace& trace,
                    double eps_outer);

// Fixed-L segment check of the summed squared steps against
// 2 (Phi_first - Phi_last) / (L - L_est) with L_est the largest observed
// curvature in the segment.
struct DescentSegment {
  int k = 0;
  int first_l = 0;
  int last_l = 0;
  double L = 0.0;
  double L_est = 0.0;
  double sum_sq_steps = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  bool evaluable = false;  // false when L_est >= L
  bool holds = false;
};

std::vector<DescentSegment> descent_certificate(const std::vector<InnerTraceRow>& rows);

}  // namespace dcra
