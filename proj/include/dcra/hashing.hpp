#pragma once

#include <cstdint>
#include <vector>

#include "dcra/solver.hpp"

// Alternating minimization for supervised hashing on synthetic data:
// min over W (d x r) and sign matrices X (n x r) of
// ||B - W X^T||_1 + (delta_reg/2) ||W||_F^2. The W-step runs fixed-step
// gradient descent on the Huber-smoothed objective; the X-step solves one
// small sign problem per column of B, guarded so a column's code only
// changes when it improves that column's true l1 objective.

namespace dcra {

struct HashingProblem {
  Matrix B;            // d x n
  int r_bits = 8;
  double delta_reg = 1.0;
  double mu = 0.1;     // Huber parameter for the W-step
  int K = 5;           // outer alternations

  void validate() const;
};

double hashing_objective(const Matrix& B, const Matrix& W, const Matrix& X, double delta_reg);

struct WStepOptions {
  double grad_tol = 1e-6;
  int max_iters = 500;
};

// Gradient descent at the fixed step 1/(n*r/mu + delta_reg); the smoothed
// objective is nonincreasing across iterations.
Matrix w_step(const Matrix& B, const Matrix& X, const Matrix& W0, double mu, double delta_reg,
              const WStepOptions& opt = {});

// Per-column sign codes: column j of B yields the row of X minimizing
// ||W x - B_col_j||_1, solved by the penalty solver with A = W shared across
// columns. X_prev supplies the fallback codes for the monotonicity guard.
Matrix x_step(const Matrix& B, const Matrix& W, const Matrix& X_prev, const SolverConfig& column_cfg);

// k_max = 50 and a fixed per-alternation seed; n subproblems per round have
// to stay desk-scale.
SolverConfig default_column_config(std::uint64_t seed);

struct HashingTraceRow {
  int round = 0;
  char phase = 'i';  // 'i' initial, 'w' after the W-step, 'x' after the X-step
  double objective = 0.0;
};

struct HashingResult {
  Matrix W;
  Matrix X;
  std::vector<HashingTraceRow> trace;
};

// Seeded cold start: Gaussian W0, random sign X0.
HashingResult alternate(const HashingProblem& prob, std::uint64_t seed);

// Explicit start, e.g. at a planted factor pair to check that the
// alternation holds the objective there. The seed only feeds the per-column
// solver configs.
HashingResult alternate_from(const HashingProblem& prob, Matrix W0, Matrix X0, std::uint64_t seed);

// Planted synthetic model B = W_true X_true^T + sparse noise.
struct PlantedSpec {
  int d = 8;
  int n = 30;
  int r_bits = 6;
  double noise_density = 0.05;
  double noise_scale = 1.0;
  double delta_reg = 1.0;
  double mu = 0.1;
  int K = 5;
  std::uint64_t seed = 0;
};

struct PlantedHashing {
  HashingProblem prob;
  Matrix W_true;
  Matrix X_true;
  double planted_objective = 0.0;
};

PlantedHashing gen_planted_hashing(const PlantedSpec& spec);

}  // namespace dcra
