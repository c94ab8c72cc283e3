#include "dcra/hashing.hpp"

#include <cmath>
#include <iostream>

#include "dcra/kernels.hpp"
#include "dcra/loss.hpp"
#include "dcra/rng.hpp"
#include "dcra/rounding.hpp"

namespace dcra {

void HashingProblem::validate() const {
  check(B.rows >= 1 && B.cols >= 1, "hashing: B must be nonempty");
  check(r_bits >= 1, "hashing: r_bits must be >= 1");
  check(delta_reg > 0.0, "hashing: delta_reg must be positive");
  check(mu > 0.0, "hashing: mu must be positive");
  check(K >= 0, "hashing: K must be nonnegative");
}

double hashing_objective(const Matrix& B, const Matrix& W, const Matrix& X, double delta_reg) {
  const Matrix WXt = par::matmul_nt(W, X);
  double l1 = 0.0;
  for (std::size_t i = 0; i < B.data.size(); ++i) l1 += std::abs(B.data[i] - WXt.data[i]);
  return l1 + 0.5 * delta_reg * par::dot(W.data, W.data);
}

Matrix w_step(const Matrix& B, const Matrix& X, const Matrix& W0, double mu, double delta_reg,
              const WStepOptions& opt) {
  const int n = X.rows, r = X.cols;
  check(B.cols == n, "w_step: cols(B) must equal rows(X)");
  check(W0.rows == B.rows && W0.cols == r, "w_step: W0 shape mismatch");
  check(mu > 0.0 && delta_reg > 0.0, "w_step: mu and delta_reg must be positive");

  const double step = 1.0 / (static_cast<double>(n) * r / mu + delta_reg);
  Matrix W = W0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const Matrix WXt = par::matmul_nt(W, X);
    Matrix R(B.rows, B.cols);
    for (std::size_t i = 0; i < R.data.size(); ++i) R.data[i] = B.data[i] - WXt.data[i];
    const auto [val, dH] = huber_value_grad(R, mu);
    (void)val;
    // grad = -H'(R) X + delta W
    const Matrix HX = par::matmul(dH, X);
    double grad_sq = 0.0;
    for (std::size_t i = 0; i < W.data.size(); ++i) {
      const double g = -HX.data[i] + delta_reg * W.data[i];
      grad_sq += g * g;
      W.data[i] -= step * g;
    }
    if (std::sqrt(grad_sq) <= opt.grad_tol) break;
  }
  return W;
}

SolverConfig default_column_config(std::uint64_t seed) {
  SolverConfig cfg;
  cfg.k_max = 50;
  cfg.seed = seed;
  return cfg;
}

Matrix x_step(const Matrix& B, const Matrix& W, const Matrix& X_prev, const SolverConfig& column_cfg) {
  const int n = B.cols, r = W.cols;
  check(W.rows == B.rows, "x_step: rows(W) must equal rows(B)");
  check(X_prev.rows == n && X_prev.cols == r, "x_step: X_prev shape mismatch");

  SolverConfig cfg = column_cfg;
  cfg.m = std::min(cfg.m, r + 1);  // the column subproblems live in p = r+1

  Matrix X(n, r);
  std::vector<int> failed;
  const SeparableLoss col_loss({LossBlock::l1(B.rows)});
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < n; ++j) {
    Vector bj(static_cast<std::size_t>(B.rows));
    for (int i = 0; i < B.rows; ++i) bj[static_cast<std::size_t>(i)] = B(i, j);
    ProblemInstance inst = make_instance(W, bj, col_loss, "col" + std::to_string(j));

    std::vector<int> prev(static_cast<std::size_t>(r));
    for (int t = 0; t < r; ++t) prev[static_cast<std::size_t>(t)] = X_prev(j, t) < 0.0 ? -1 : 1;
    double best_obj = true_objective(inst, prev);
    std::vector<int> best = prev;

    try {
      SolveResult res = solve(inst, cfg);
      const std::vector<int> cand = sign_round(rank_one_project(res.V));
      const double cand_obj = true_objective(inst, cand);
      // ties go to the fresh candidate so equal columns with equal previous
      // codes stay identical
      if (cand_obj <= best_obj) {
        best_obj = cand_obj;
        best = cand;
      }
    } catch (const std::exception&) {
      // keep the previous code for this column
#pragma omp critical
      failed.push_back(j);
    }
    for (int t = 0; t < r; ++t) X(j, t) = best[static_cast<std::size_t>(t)];
  }
  if (!failed.empty())
    std::cerr << "dcra: x_step kept the previous code for " << failed.size() << " column(s)\n";
  return X;
}

HashingResult alternate_from(const HashingProblem& prob, Matrix W0, Matrix X0, std::uint64_t seed) {
  prob.validate();
  check(W0.rows == prob.B.rows && W0.cols == prob.r_bits, "alternate: W0 shape mismatch");
  check(X0.rows == prob.B.cols && X0.cols == prob.r_bits, "alternate: X0 shape mismatch");

  HashingResult out;
  out.W = std::move(W0);
  out.X = std::move(X0);
  out.trace.push_back({0, 'i', hashing_objective(prob.B, out.W, out.X, prob.delta_reg)});
  for (int k = 1; k <= prob.K; ++k) {
    out.W = w_step(prob.B, out.X, out.W, prob.mu, prob.delta_reg);
    out.trace.push_back({k, 'w', hashing_objective(prob.B, out.W, out.X, prob.delta_reg)});
    // one shared seed per alternation: identical columns get identical codes
    out.X = x_step(prob.B, out.W, out.X, default_column_config(seed ^ static_cast<std::uint64_t>(k)));
    out.trace.push_back({k, 'x', hashing_objective(prob.B, out.W, out.X, prob.delta_reg)});
  }
  return out;
}

HashingResult alternate(const HashingProblem& prob, std::uint64_t seed) {
  prob.validate();
  const int d = prob.B.rows, n = prob.B.cols, r = prob.r_bits;
  Rng rng = Rng::derived(seed, 0x77);
  Matrix W0(d, r);
  for (auto& v : W0.data) v = rng.normal();
  Matrix X0(n, r);
  for (auto& v : X0.data) v = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  return alternate_from(prob, std::move(W0), std::move(X0), seed);
}

PlantedHashing gen_planted_hashing(const PlantedSpec& spec) {
  check(spec.d >= 1 && spec.n >= 1 && spec.r_bits >= 1, "planted: dimensions must be >= 1");
  Rng rng(spec.seed);
  PlantedHashing out;
  out.W_true = Matrix(spec.d, spec.r_bits);
  for (auto& v : out.W_true.data) v = rng.normal();
  out.X_true = Matrix(spec.n, spec.r_bits);
  for (auto& v : out.X_true.data) v = rng.uniform01() < 0.5 ? -1.0 : 1.0;

  Matrix B = par::matmul_nt(out.W_true, out.X_true);
  double noise_l1 = 0.0;
  for (auto& v : B.data)
    if (rng.uniform01() < spec.noise_density) {
      const double noise = spec.noise_scale * rng.normal();
      v += noise;
      noise_l1 += std::abs(noise);
    }

  out.prob.B = std::move(B);
  out.prob.r_bits = spec.r_bits;
  out.prob.delta_reg = spec.delta_reg;
  out.prob.mu = spec.mu;
  out.prob.K = spec.K;
  out.planted_objective = noise_l1 + 0.5 * spec.delta_reg * par::dot(out.W_true.data, out.W_true.data);
  return out;
}

}  // namespace dcra
