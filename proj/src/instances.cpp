#include "dcra/instances.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dcra/kernels.hpp"
#include "dcra/rng.hpp"

namespace dcra {

ProblemInstance gen_random_l1(int n, int r, std::uint64_t seed) {
  check(n >= 1 && r >= 1, "gen_random_l1: dimensions must be >= 1");
  Rng rng(seed);
  Matrix A(r, n);
  for (auto& v : A.data) v = rng.normal();
  Vector b(static_cast<std::size_t>(r));
  for (auto& v : b) v = rng.normal();
  std::ostringstream label;
  label << "l1_r" << r << "_n" << n << "_s" << seed;
  return make_instance(std::move(A), std::move(b), SeparableLoss({LossBlock::l1(r)}), label.str());
}

int BcsSpec::measurement_count() const { return static_cast<int>(std::lround(alpha * N)); }

void BcsSpec::validate() const {
  check(N >= 1, "bcs: N must be >= 1");
  check(alpha > 0.0 && alpha <= 1.0, "bcs: alpha must lie in (0,1]");
  check(measurement_count() >= 1, "bcs: round(alpha*N) must be >= 1");
  check(sparsity_rho >= 0.0 && sparsity_rho <= 1.0, "bcs: sparsity rate must lie in [0,1]");
  check(mu >= 0.0, "bcs: mu must be nonnegative");
  check(lambda >= 0.0, "bcs: lambda must be nonnegative");
}

BcsInstance gen_bcs(const BcsSpec& spec) {
  spec.validate();
  const int M = spec.measurement_count(), N = spec.N;
  Rng rng(spec.seed);
  BcsInstance out;
  out.model.A = Matrix(M, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  const double mean = spec.mu / static_cast<double>(N);
  for (auto& v : out.model.A.data) v = mean + scale * rng.normal();
  out.x0.resize(static_cast<std::size_t>(N));
  Vector x0d(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    out.x0[static_cast<std::size_t>(j)] = rng.uniform01() < spec.sparsity_rho ? 1 : 0;
    x0d[static_cast<std::size_t>(j)] = out.x0[static_cast<std::size_t>(j)];
  }
  out.model.y.resize(static_cast<std::size_t>(M));
  par::matvec(out.model.A, x0d, out.model.y);
  out.model.lambda = spec.lambda;
  return out;
}

double objective01(const Bcs01Model& model, const std::vector<int>& x01) {
  check(static_cast<int>(x01.size()) == model.A.cols, "objective01: x length mismatch");
  Vector xd(x01.size());
  double count = 0.0;
  for (std::size_t j = 0; j < x01.size(); ++j) {
    check(x01[j] == 0 || x01[j] == 1, "objective01: entries must be 0 or 1");
    xd[j] = x01[j];
    count += x01[j];
  }
  Vector res(static_cast<std::size_t>(model.A.rows));
  par::matvec(model.A, xd, res);
  double l1 = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) l1 += std::abs(res[i] - model.y[i]);
  return l1 + model.lambda * count;
}

PmOneModel pm_one_model(const Bcs01Model& model) {
  const int M = model.A.rows, N = model.A.cols;
  PmOneModel pm;
  pm.A = Matrix(M, N);
  for (std::size_t i = 0; i < pm.A.data.size(); ++i) pm.A.data[i] = 0.5 * model.A.data[i];
  pm.b.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < N; ++j) row_sum += model.A(i, j);
    pm.b[static_cast<std::size_t>(i)] = model.y[static_cast<std::size_t>(i)] - 0.5 * row_sum;
  }
  pm.c.assign(static_cast<std::size_t>(N), model.lambda / 2.0);
  return pm;
}

namespace {

ProblemInstance stack_identity(const Matrix& Ap, const Vector& bp, const Vector& c, double id_shift,
                               const std::string& label) {
  const int M = Ap.rows, N = Ap.cols;
  check(static_cast<int>(bp.size()) == M, "augment: b length mismatch");
  check(static_cast<int>(c.size()) == N, "augment: c length must equal cols(A)");
  Matrix Abar(M + N, N);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j) Abar(i, j) = Ap(i, j);
  for (int j = 0; j < N; ++j) Abar(M + j, j) = 1.0;
  Vector bbar(static_cast<std::size_t>(M + N), id_shift);
  for (int i = 0; i < M; ++i) bbar[static_cast<std::size_t>(i)] = bp[static_cast<std::size_t>(i)];
  SeparableLoss loss({LossBlock::l1(M), LossBlock::linear(c)});
  return make_instance(std::move(Abar), std::move(bbar), std::move(loss), label);
}

}  // namespace

ProblemInstance augment_linear(const Matrix& Ap, const Vector& bp, const Vector& c) {
  return stack_identity(Ap, bp, c, 0.0, "augmented");
}

ProblemInstance zero_one_transform(const Bcs01Model& model) {
  const PmOneModel pm = pm_one_model(model);
  return stack_identity(pm.A, pm.b, pm.c, -1.0, "bcs01");
}

OracleResult brute_force_oracle(const ProblemInstance& inst, int n_cap) {
  check(inst.n <= n_cap, "brute_force_oracle: n exceeds the enumeration cap");
  check(inst.n >= 1 && inst.n < 63, "brute_force_oracle: n out of range");
  const int n = inst.n, r = inst.r;

  // transposed copy for contiguous column access during flips
  Matrix At(n, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) At(j, i) = inst.A(i, j);

  std::vector<int> z(static_cast<std::size_t>(n), -1);
  Vector u(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s -= inst.A(i, j);
    u[static_cast<std::size_t>(i)] = s - inst.b[static_cast<std::size_t>(i)];
  }

  std::vector<int> best_z = z;
  double best = loss_value(inst.loss, u);
  const std::uint64_t total = 1ULL << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int j = std::countr_zero(i);  // Gray code: flip bit ctz(i) at step i
    z[static_cast<std::size_t>(j)] = -z[static_cast<std::size_t>(j)];
    const double step = 2.0 * z[static_cast<std::size_t>(j)];
    const double* col = At.data.data() + static_cast<std::size_t>(j) * r;
    for (int t = 0; t < r; ++t) u[static_cast<std::size_t>(t)] += step * col[t];
    const double obj = loss_value(inst.loss, u);
    if (obj < best || (obj == best && z < best_z)) {
      best = obj;
      best_z = z;
    }
  }
  return {std::move(best_z), best};
}

OracleResult projected_subgradient_baseline(const ProblemInstance& inst, int iters, std::uint64_t seed) {
  check(iters >= 1, "projected_subgradient_baseline: iters must be >= 1");
  (void)seed;
  const int n = inst.n, r = inst.r;
  const double a_norm = spectral_norm_est(inst.A);
  const double a = a_norm > 0.0 ? 1.0 / a_norm : 1.0;

  Vector x(static_cast<std::size_t>(n), 0.0);
  Vector u(static_cast<std::size_t>(r)), s(static_cast<std::size_t>(r)), g(static_cast<std::size_t>(n));
  std::vector<int> best_z;
  double best = 0.0;

  for (int t = 1; t <= iters; ++t) {
    par::matvec(inst.A, x, u);
    for (int i = 0; i < r; ++i) u[static_cast<std::size_t>(i)] -= inst.b[static_cast<std::size_t>(i)];
    // blockwise subgradient of the loss at u
    std::size_t off = 0;
    for (const auto& blk : inst.loss.blocks) {
      const std::size_t nr = static_cast<std::size_t>(blk.row_count);
      switch (blk.kind) {
        case LossKind::L1:
          for (std::size_t i = 0; i < nr; ++i) {
            const double v = u[off + i];
            s[off + i] = v > 0.0 ? blk.weight : (v < 0.0 ? -blk.weight : 0.0);
          }
          break;
        case LossKind::Linear:
          for (std::size_t i = 0; i < nr; ++i) s[off + i] = blk.coeffs[i];
          break;
        case LossKind::Huber:
          for (std::size_t i = 0; i < nr; ++i) {
            const double v = u[off + i];
            s[off + i] = v > blk.huber_mu ? 1.0 : (v < -blk.huber_mu ? -1.0 : v / blk.huber_mu);
          }
          break;
      }
      off += nr;
    }
    par::matvec_t(inst.A, s, g);
    const double step = a / std::sqrt(static_cast<double>(t));
    for (int j = 0; j < n; ++j) {
      double v = x[static_cast<std::size_t>(j)] - step * g[static_cast<std::size_t>(j)];
      x[static_cast<std::size_t>(j)] = v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
    }
    std::vector<int> z(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) z[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] < 0.0 ? -1 : 1;
    const double obj = true_objective(inst, z);
    if (best_z.empty() || obj < best) {
      best = obj;
      best_z = std::move(z);
    }
  }
  return {std::move(best_z), best};
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// " + c name" / " - c name" with the leading sign folded in
void append_term(std::string& line, bool& first, double coeff, const std::string& name) {
  if (coeff == 0.0) return;
  const double mag = std::abs(coeff);
  if (first) {
    line += (coeff < 0 ? "- " : "");
    first = false;
  } else {
    line += coeff < 0 ? " - " : " + ";
  }
  line += fmt17(mag) + " " + name;
}

}  // namespace

void milp_export(const ProblemInstance& inst, std::ostream& os) {
  for (const auto& b : inst.loss.blocks)
    check(b.kind != LossKind::Huber, "milp_export: only l1 and linear blocks are supported");

  const int n = inst.n, r = inst.r;
  Vector row_sum(static_cast<std::size_t>(r), 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) row_sum[static_cast<std::size_t>(i)] += inst.A(i, j);

  // per-row weights/coeffs laid out flat
  Vector l1_weight(static_cast<std::size_t>(r), 0.0);
  Vector lin_coeff(static_cast<std::size_t>(r), 0.0);
  std::vector<bool> is_l1(static_cast<std::size_t>(r), false);
  {
    std::size_t off = 0;
    for (const auto& blk : inst.loss.blocks) {
      for (int i = 0; i < blk.row_count; ++i) {
        if (blk.kind == LossKind::L1) {
          is_l1[off + i] = true;
          l1_weight[off + i] = blk.weight;
        } else {
          lin_coeff[off + i] = blk.coeffs[static_cast<std::size_t>(i)];
        }
      }
      off += static_cast<std::size_t>(blk.row_count);
    }
  }

  os << "\\ binary l1 model, minimize over x in {0,1}: residual vars t_i >= |row_i (2x - e) - b_i|\n";
  os << "\\ schema: dcra-milp v1\n";
  os << "Minimize\n obj: ";
  std::string obj;
  bool first = true;
  for (int i = 0; i < r; ++i)
    if (is_l1[static_cast<std::size_t>(i)])
      append_term(obj, first, l1_weight[static_cast<std::size_t>(i)], "t" + std::to_string(i));
  Vector x_coeff(static_cast<std::size_t>(n), 0.0);
  double constant = 0.0;
  for (int i = 0; i < r; ++i) {
    const double c = lin_coeff[static_cast<std::size_t>(i)];
    if (c == 0.0) continue;
    for (int j = 0; j < n; ++j) x_coeff[static_cast<std::size_t>(j)] += 2.0 * c * inst.A(i, j);
    constant -= c * (row_sum[static_cast<std::size_t>(i)] + inst.b[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < n; ++j) append_term(obj, first, x_coeff[static_cast<std::size_t>(j)], "x" + std::to_string(j));
  if (constant != 0.0) append_term(obj, first, constant, "unit");
  if (first) obj = "0 x0";
  os << obj << "\n";

  os << "Subject To\n";
  for (int i = 0; i < r; ++i) {
    if (!is_l1[static_cast<std::size_t>(i)]) continue;
    const double rhs = row_sum[static_cast<std::size_t>(i)] + inst.b[static_cast<std::size_t>(i)];
    std::string pos, neg;
    bool pf = true, nf = true;
    append_term(pos, pf, 1.0, "t" + std::to_string(i));
    append_term(neg, nf, 1.0, "t" + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      append_term(pos, pf, -2.0 * inst.A(i, j), "x" + std::to_string(j));
      append_term(neg, nf, 2.0 * inst.A(i, j), "x" + std::to_string(j));
    }
    os << " pos" << i << ": " << pos << " >= " << fmt17(-rhs) << "\n";
    os << " neg" << i << ": " << neg << " >= " << fmt17(rhs) << "\n";
  }

  if (constant != 0.0) os << "Bounds\n unit = 1\n";

  os << "Binary\n";
  for (int j = 0; j < n; ++j) os << " x" << j << "\n";
  os << "End\n";
}

void milp_export_file(const ProblemInstance& inst, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  check(os.good(), "milp_export: cannot open " + path);
  milp_export(inst, os);
  os.flush();
  check(os.good(), "milp_export: write failed for " + path);
}

}  // namespace dcra
