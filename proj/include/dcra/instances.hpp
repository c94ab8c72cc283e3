#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dcra/model.hpp"

// Instance generators, the {0,1} <-> {-1,1} model transforms, the exhaustive
// oracle, the projected-subgradient comparator, and the MILP exporter.

namespace dcra {

// r x n instance with iid standard-normal A and b and a plain l1 loss.
// n is the binary dimension (columns of A), r the residual dimension (rows).
ProblemInstance gen_random_l1(int n, int r, std::uint64_t seed);

struct BcsSpec {
  int N = 0;                 // signal dimension
  double alpha = 0.5;        // compression ratio M/N
  double sparsity_rho = 0.1; // Pr{x0_i = 1}
  double mu = 0.0;           // bias of the sensing entries
  double lambda = 0.1;       // l1 regularization weight
  std::uint64_t seed = 0;

  int measurement_count() const;  // M = round(alpha*N), >= 1
  void validate() const;
};

// min over x in {0,1}^N of ||A x - y||_1 + lambda * sum(x)
struct Bcs01Model {
  Matrix A;  // M x N
  Vector y;  // length M
  double lambda = 0.0;
};

struct BcsInstance {
  Bcs01Model model;
  std::vector<int> x0;  // planted signal, entries in {0,1}
};

BcsInstance gen_bcs(const BcsSpec& spec);

double objective01(const Bcs01Model& model, const std::vector<int>& x01);

// Variable change x = (z+e)/2: A' = A/2, b' = y - A e / 2, c = (lambda/2) e.
struct PmOneModel {
  Matrix A;
  Vector b;
  Vector c;
};
PmOneModel pm_one_model(const Bcs01Model& model);

// Stacks the identity under A' so the linear term rides along in the
// residual: rows [A'; I_N], shifts [b'; 0], loss [L1(M), Linear(c)].
ProblemInstance augment_linear(const Matrix& Ap, const Vector& bp, const Vector& c);

// Full {0,1} -> {-1,1} pipeline. The identity block of b is shifted to -e so
// the linear rows see z + e = 2x, making the instance objective equal
// objective01((z+e)/2) exactly, constant included.
ProblemInstance zero_one_transform(const Bcs01Model& model);

struct OracleResult {
  std::vector<int> z;
  double obj = 0.0;
};

// Exhaustive enumeration by Gray-code residual updates; ties resolve to the
// lexicographically smallest sign vector (-1 before +1).
OracleResult brute_force_oracle(const ProblemInstance& inst, int n_cap = 22);

// Subgradient steps on the box relaxation [-1,1]^n with step a/sqrt(t),
// a = 1/||A||_2-estimate, returning the best sign-rounded point along the
// trajectory. The seed is reserved for future randomized restarts; the
// method itself is deterministic from the zero start.
OracleResult projected_subgradient_baseline(const ProblemInstance& inst, int iters, std::uint64_t seed);

// LP-format MILP for l1 (+ optional linear rows) instances:
//   min sum w_i t_i (+ linear part)  s.t.  t >= +-(A(2x - e) - b), x binary.
// Deterministic text, %.17g coefficients.
void milp_export(const ProblemInstance& inst, std::ostream& os);
void milp_export_file(const ProblemInstance& inst, const std::string& path);

}  // namespace dcra
