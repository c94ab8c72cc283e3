#include "dcra/loss.hpp"

#include <cmath>
#include <limits>

#include "dcra/kernels.hpp"

namespace dcra {

namespace {

double huber_scalar(double t, double mu) {
  const double a = std::abs(t);
  return a <= mu ? t * t / (2.0 * mu) : a - mu / 2.0;
}

double huber_deriv(double t, double mu) {
  if (t > mu) return 1.0;
  if (t < -mu) return -1.0;
  return t / mu;
}

void check_input(const SeparableLoss& loss, std::span<const double> x, double gamma) {
  check(static_cast<int>(x.size()) == loss.total_rows, "loss: vector length does not match total_rows");
  check(gamma > 0.0, "loss: gamma must be positive");
}

}  // namespace

LossBlock LossBlock::l1(int rows, double weight) {
  LossBlock b;
  b.kind = LossKind::L1;
  b.row_count = rows;
  b.weight = weight;
  b.validate();
  return b;
}

LossBlock LossBlock::linear(Vector coeffs) {
  LossBlock b;
  b.kind = LossKind::Linear;
  b.row_count = static_cast<int>(coeffs.size());
  b.coeffs = std::move(coeffs);
  b.validate();
  return b;
}

LossBlock LossBlock::huber(int rows, double mu) {
  LossBlock b;
  b.kind = LossKind::Huber;
  b.row_count = rows;
  b.huber_mu = mu;
  b.validate();
  return b;
}

void LossBlock::validate() const {
  check(row_count >= 1, "LossBlock: row_count must be >= 1");
  check(weight >= 0.0, "LossBlock: weight must be nonnegative");
  if (kind == LossKind::Linear)
    check(static_cast<int>(coeffs.size()) == row_count, "LossBlock: coeffs length must equal row_count");
  else
    check(coeffs.empty(), "LossBlock: coeffs only valid for Linear blocks");
  if (kind == LossKind::Huber) check(huber_mu > 0.0, "LossBlock: huber_mu must be positive");
}

SeparableLoss::SeparableLoss(std::vector<LossBlock> bs) : blocks(std::move(bs)) {
  check(!blocks.empty(), "SeparableLoss: needs at least one block");
  for (const auto& b : blocks) {
    b.validate();
    total_rows += b.row_count;
  }
}

double loss_value(const SeparableLoss& loss, std::span<const double> u) {
  check(static_cast<int>(u.size()) == loss.total_rows, "loss_value: vector length does not match total_rows");
  // Small sizes accumulate in place; the scratch + chunked reduction kicks in
  // only when it pays, and both orders agree bit for bit (chunks are
  // left-to-right within and across).
  if (static_cast<std::size_t>(loss.total_rows) <= kReduceChunk) {
    double s = 0.0;
    std::size_t off = 0;
    for (const auto& b : loss.blocks) {
      const std::size_t nr = static_cast<std::size_t>(b.row_count);
      switch (b.kind) {
        case LossKind::L1:
          for (std::size_t i = 0; i < nr; ++i) s += b.weight * std::abs(u[off + i]);
          break;
        case LossKind::Linear:
          for (std::size_t i = 0; i < nr; ++i) s += b.coeffs[i] * u[off + i];
          break;
        case LossKind::Huber:
          for (std::size_t i = 0; i < nr; ++i) s += huber_scalar(u[off + i], b.huber_mu);
          break;
      }
      off += nr;
    }
    return s;
  }
  Vector terms(u.size());
  std::size_t off = 0;
  for (const auto& b : loss.blocks) {
    const std::size_t nr = static_cast<std::size_t>(b.row_count);
    switch (b.kind) {
      case LossKind::L1:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          terms[off + i] = b.weight * std::abs(u[off + i]);
        break;
      case LossKind::Linear:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          terms[off + i] = b.coeffs[static_cast<std::size_t>(i)] * u[off + i];
        break;
      case LossKind::Huber:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          terms[off + i] = huber_scalar(u[off + i], b.huber_mu);
        break;
    }
    off += nr;
  }
  return par::sum(terms);
}

void prox(const SeparableLoss& loss, std::span<const double> x, double gamma, std::span<double> out) {
  check_input(loss, x, gamma);
  check(x.size() == out.size(), "prox: output length mismatch");
  std::size_t off = 0;
  for (const auto& b : loss.blocks) {
    const std::size_t nr = static_cast<std::size_t>(b.row_count);
    switch (b.kind) {
      case LossKind::L1: {
        const double thr = gamma * b.weight;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i) {
          const double v = x[off + i];
          const double mag = std::abs(v) - thr;
          out[off + i] = mag > 0.0 ? std::copysign(mag, v) : 0.0;
        }
        break;
      }
      case LossKind::Linear:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          out[off + i] = x[off + i] - gamma * b.coeffs[static_cast<std::size_t>(i)];
        break;
      case LossKind::Huber: {
        const double edge = b.huber_mu + gamma;
        const double shrink = b.huber_mu / edge;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i) {
          const double v = x[off + i];
          out[off + i] = std::abs(v) <= edge ? v * shrink : v - std::copysign(gamma, v);
        }
        break;
      }
    }
    off += nr;
  }
}

Vector prox(const SeparableLoss& loss, const Vector& x, double gamma) {
  Vector out(x.size());
  prox(loss, x, gamma, out);
  return out;
}

double envelope(const SeparableLoss& loss, std::span<const double> x, double gamma) {
  check_input(loss, x, gamma);
  if (static_cast<std::size_t>(loss.total_rows) <= kReduceChunk) {
    double s = 0.0;
    std::size_t off = 0;
    for (const auto& b : loss.blocks) {
      const std::size_t nr = static_cast<std::size_t>(b.row_count);
      switch (b.kind) {
        case LossKind::L1: {
          const double thr = gamma * b.weight;
          for (std::size_t i = 0; i < nr; ++i) {
            const double v = x[off + i];
            s += std::abs(v) <= thr ? v * v / (2.0 * gamma)
                                    : b.weight * std::abs(v) - gamma * b.weight * b.weight / 2.0;
          }
          break;
        }
        case LossKind::Linear:
          for (std::size_t i = 0; i < nr; ++i) {
            const double c = b.coeffs[i];
            s += c * x[off + i] - gamma * c * c / 2.0;
          }
          break;
        case LossKind::Huber:
          for (std::size_t i = 0; i < nr; ++i) s += huber_scalar(x[off + i], b.huber_mu + gamma);
          break;
      }
      off += nr;
    }
    return s;
  }
  Vector terms(x.size());
  std::size_t off = 0;
  for (const auto& b : loss.blocks) {
    const std::size_t nr = static_cast<std::size_t>(b.row_count);
    switch (b.kind) {
      case LossKind::L1: {
        const double thr = gamma * b.weight;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i) {
          const double v = x[off + i];
          terms[off + i] = std::abs(v) <= thr ? v * v / (2.0 * gamma)
                                              : b.weight * std::abs(v) - gamma * b.weight * b.weight / 2.0;
        }
        break;
      }
      case LossKind::Linear:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i) {
          const double c = b.coeffs[static_cast<std::size_t>(i)];
          terms[off + i] = c * x[off + i] - gamma * c * c / 2.0;
        }
        break;
      case LossKind::Huber: {
        const double eff = b.huber_mu + gamma;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          terms[off + i] = huber_scalar(x[off + i], eff);
        break;
      }
    }
    off += nr;
  }
  return par::sum(terms);
}

void envelope_gradient(const SeparableLoss& loss, std::span<const double> x, double gamma, std::span<double> out) {
  check_input(loss, x, gamma);
  check(x.size() == out.size(), "envelope_gradient: output length mismatch");
  std::size_t off = 0;
  for (const auto& b : loss.blocks) {
    const std::size_t nr = static_cast<std::size_t>(b.row_count);
    switch (b.kind) {
      case LossKind::L1: {
        // (x - prox(x))/gamma = clamp(x/gamma, +-w)
        const double w = b.weight;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i) {
          const double v = x[off + i] / gamma;
          out[off + i] = v > w ? w : (v < -w ? -w : v);
        }
        break;
      }
      case LossKind::Linear:
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          out[off + i] = b.coeffs[static_cast<std::size_t>(i)];
        break;
      case LossKind::Huber: {
        const double eff = b.huber_mu + gamma;
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(nr); ++i)
          out[off + i] = huber_deriv(x[off + i], eff);
        break;
      }
    }
    off += nr;
  }
}

Vector envelope_gradient(const SeparableLoss& loss, const Vector& x, double gamma) {
  Vector out(x.size());
  envelope_gradient(loss, x, gamma, out);
  return out;
}

std::pair<double, Matrix> huber_value_grad(const Matrix& R, double mu) {
  check(mu > 0.0, "huber_value_grad: mu must be positive");
  Matrix grad(R.rows, R.cols);
  Vector terms(R.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(R.size()); ++i) {
    const double t = R.data[static_cast<std::size_t>(i)];
    terms[static_cast<std::size_t>(i)] = huber_scalar(t, mu);
    grad.data[static_cast<std::size_t>(i)] = huber_deriv(t, mu);
  }
  return {par::sum(terms), std::move(grad)};
}

double loss_lipschitz_bound(const SeparableLoss& loss) {
  double sq = 0.0;
  for (const auto& b : loss.blocks) {
    switch (b.kind) {
      case LossKind::L1:
        sq += b.weight * b.weight * b.row_count;
        break;
      case LossKind::Linear:
        for (double c : b.coeffs) sq += c * c;
        break;
      case LossKind::Huber:
        sq += static_cast<double>(b.row_count);
        break;
    }
  }
  return std::sqrt(sq);
}

}  // namespace dcra
