#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcra/model.hpp"

// The penalty solver: an outer loop that grows the rank-one penalty rho by
// min(sigma*rho, rho_max) until the feasibility gap ||V||_F^2 - sigma1(V)^2
// drops below eps_outer, and an inner majorization-minimization loop whose
// update projects (L V - grad - rho Gamma)/(2 rho + L) column-wise back onto
// the unit sphere. The curvature L is managed by backtracking: doubled when
// the quadratic upper model fails, tentatively halved after a streak of
// successes.

namespace dcra {

struct SolverConfig {
  int m = 5;
  // empty: 0.05 * mean column norm of A, keeping the initial rank-one pull
  // below the data-force scale
  std::optional<double> rho0;
  double sigma = 1.2;
  double rho_max = 1e6;
  std::optional<double> delta;   // empty: 0.1*(median|b|+1)
  double eps_outer = 1e-3;
  double eps_inner = 1e-6;
  int k_max = 200;
  int l_max = 2000;
  std::optional<double> L_init;  // empty: 4*||A||_1*||A||_inf/delta
  std::uint64_t seed = 0;
  int l_halve_every = 10;  // tentative L halving period; <= 0 keeps L fixed
  bool record_inner = false;

  void validate() const;
};

enum class Termination { GapReached, KMaxExceeded, InnerStall };
enum class InnerStatus { Converged, LMaxReached, Stalled };

const char* to_string(Termination t);

struct InnerTraceRow {
  int k = 0;
  int l = 0;
  double L = 0.0;
  double phi_prev = 0.0;
  double phi = 0.0;
  double step_norm = 0.0;
  double curvature = 0.0;  // 2 (f~(V+) - f~(V) - <g, dV>) / ||dV||^2
  double surrogate = 0.0;
};

struct OuterRow {
  int k = 0;
  double rho = 0.0;
  int inner_iters = 0;
  long l_total = 0;  // cumulative inner iterations
  double gap = 0.0;
  double phi = 0.0;
  double ftilde = 0.0;
  double sigma1_sq = 0.0;
  int rank = 0;
  double surrogate = 0.0;
  double min_abs_p1 = 0.0;
  double seconds = 0.0;
  InnerStatus inner_status = InnerStatus::Converged;
};

// Data recorded for each outer iterate V^0, V^1, ..., V^kbar (one more entry
// than the rows): what the gap certificate needs later.
struct IterateRecord {
  double ftilde = 0.0;
  double sigma1_sq = 0.0;
  int rank = 0;
};

struct OuterTrace {
  std::vector<OuterRow> rows;
  std::vector<IterateRecord> iterates;
  std::vector<InnerTraceRow> inner_rows;  // populated when record_inner
  Termination termination = Termination::KMaxExceeded;
  double rho_final = 0.0;  // schedule value at the terminating index
  double delta_used = 0.0;
  double L_final = 0.0;
  double total_seconds = 0.0;
};

// Column-wise projection onto unit norms. Throws on a zero column (the
// message carries the column index).
FactorizedPoint project_columns(const Matrix& M);

// One closed-form update at curvature L; evaluates the gradient and the
// spectral subgradient exactly once each.
FactorizedPoint inner_step(const SmoothedObjective& obj, const FactorizedPoint& V, double L);

struct InnerResult {
  FactorizedPoint V;
  InnerStatus status = InnerStatus::Converged;
  int iters = 0;
  double last_step_norm = 0.0;
  double sum_sq_steps = 0.0;
  double phi0 = 0.0;
  double phi = 0.0;
  double L = 0.0;
  double last_surrogate = 0.0;
  std::vector<InnerTraceRow> rows;
};

InnerResult solve_inner(const SmoothedObjective& obj, const FactorizedPoint& V0, const SolverConfig& cfg);

struct SolveResult {
  FactorizedPoint V;
  OuterTrace trace;
};

SolveResult solve(const ProblemInstance& inst, const SolverConfig& cfg);

// ||grad f~(V_next) - grad f~(V_prev)||_F + L ||V_next - V_prev||_F, the
// computable majorant of the stationarity residual.
double stationarity_surrogate(const SmoothedObjective& obj, const FactorizedPoint& V_prev,
                              const FactorizedPoint& V_next, double L);

// Seeded Gaussian start with normalized columns, resampled until numerically
// full rank.
FactorizedPoint initial_point(int m, int p, std::uint64_t seed);

// ||V||_F^2 - sigma1^2 evaluated as the deflated energy ||V - sigma1 q1
// p1^T||_F^2; the direct difference cancels catastrophically near rank one.
double rank_one_gap(const Matrix& V, const SpectralInfo& info);

double auto_curvature_init(const ProblemInstance& inst, double delta);

double auto_rho0(const ProblemInstance& inst);

// numerical rank of V: singular values above 1e-8 * sigma1
int numerical_rank(const Matrix& V, double rel_cutoff = 1e-8);

}  // namespace dcra
