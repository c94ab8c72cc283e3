#pragma once

#include <string>

#include "dcra/core.hpp"
#include "dcra/loss.hpp"

// Lifted problem data. An instance is min over sign vectors z of
// f(A z - b) with a separable loss f. The lifted variable is the p x p
// Gram matrix X = V^T V with p = n + 1 and unit diagonal; column 0 of V is
// the homogenization coordinate. The linear map behind the lifting picks out
// the symmetrized first column of X, so A(V^T V) - b is computed matrix-free
// as A * (V_{1..n}^T V_0) - b.

namespace dcra {

struct ProblemInstance {
  Matrix A;  // r x n
  Vector b;  // length r
  SeparableLoss loss;
  int n = 0;
  int r = 0;
  std::string label;
};

ProblemInstance make_instance(Matrix A, Vector b, SeparableLoss loss, std::string label = "");

struct FactorizedPoint {
  Matrix V;  // m x p, unit-norm columns

  int m() const { return V.rows; }
  int p() const { return V.cols; }
};

// Throws unless 2 <= m <= p and every column norm is 1 within tol.
void validate_factorized(const FactorizedPoint& P, double tol = 1e-10);

struct SmoothedObjective {
  const ProblemInstance* inst = nullptr;
  double delta = 0.0;  // Moreau parameter
  double rho = 0.0;    // penalty weight

  SmoothedObjective(const ProblemInstance& instance, double delta_, double rho_);
};

// A(V^T V) - b without forming V^T V.
Vector lifted_residual(const ProblemInstance& inst, const FactorizedPoint& P);

// Leading singular data of V, via power iteration on the small Gram V V^T
// (falls back to a dense eigensolve when the spectrum is too flat for the
// iteration to settle). p1 is the top right singular vector with the
// homogenization coordinate made nonnegative.
struct SpectralInfo {
  double sigma1 = 0.0;
  Vector p1;        // length p, unit norm
  Vector q1;        // length m, unit norm left vector
  bool degenerate = false;
  int sweeps = 0;
};
SpectralInfo leading_pair(const Matrix& V, double tol = 1e-10, int max_sweeps = 500);

// Gamma(V) = -2 V P1 P1^T together with (P1, sigma1).
struct SpectralSubgradient {
  Matrix gamma;  // m x p
  Vector p1;
  double sigma1 = 0.0;
  bool degenerate = false;
};
SpectralSubgradient spectral_subgradient(const FactorizedPoint& P);

// env-smoothed objective value f~(V) + rho (||V||_F^2 - sigma1(V)^2).
double smoothed_value(const SmoothedObjective& obj, const FactorizedPoint& P);

// Gradient of the smooth part f~ only (the penalty is handled by the
// solver): 2 V A*(g) with g the envelope gradient at the lifted residual,
// exploiting that A*(g) has nonzeros only in its first row and column.
Matrix smoothed_gradient(const SmoothedObjective& obj, const FactorizedPoint& P);

// f(A z - b) at a sign vector.
double true_objective(const ProblemInstance& inst, const std::vector<int>& z);

// 0.1 * (median(|b|) + 1); the smoothing default when none is configured.
double default_delta(const ProblemInstance& inst);

double frobenius_norm_sq(const Matrix& M);

}  // namespace dcra
