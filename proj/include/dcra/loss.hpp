#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dcra/core.hpp"

// Separable nonsmooth losses and their proximal calculus. A loss is an
// ordered list of row blocks, each one of:
//
//   L1(rows, w):    f(u) = w * sum |u_i|
//     prox_{g f}(x)_i = sign(x_i) * max(|x_i| - g*w, 0)
//     env_{g f}(x)_i  = x_i^2/(2g)       if |x_i| <= g*w
//                       w|x_i| - g w^2/2 otherwise
//
//   Linear(c):      f(u) = <c, u>
//     prox_{g f}(x) = x - g*c,  env_{g f}(x) = <c, x> - (g/2)||c||^2
//
//   Huber(rows, mu): f(u) = sum H_mu(u_i),
//     H_mu(t) = t^2/(2 mu) if |t| <= mu, |t| - mu/2 otherwise.
//     prox_{g f}(x)_i = x_i * mu/(mu+g)  if |x_i| <= mu+g, else x_i - g*sign(x_i)
//     env_{g f}(x)_i  = H_{mu+g}(x_i)
//
// Everything decomposes blockwise; there is no cross-block coupling. All
// functions are pure and safe to call concurrently.

namespace dcra {

enum class LossKind { L1, Linear, Huber };

struct LossBlock {
  LossKind kind = LossKind::L1;
  int row_count = 0;
  double weight = 1.0;  // L1 scale; ignored by the other kinds
  Vector coeffs;        // Linear only, length == row_count
  double huber_mu = 0.0;

  static LossBlock l1(int rows, double weight = 1.0);
  static LossBlock linear(Vector coeffs);
  static LossBlock huber(int rows, double mu);

  void validate() const;
};

struct SeparableLoss {
  std::vector<LossBlock> blocks;
  int total_rows = 0;

  SeparableLoss() = default;
  explicit SeparableLoss(std::vector<LossBlock> bs);
};

double loss_value(const SeparableLoss& loss, std::span<const double> u);

void prox(const SeparableLoss& loss, std::span<const double> x, double gamma, std::span<double> out);
Vector prox(const SeparableLoss& loss, const Vector& x, double gamma);

double envelope(const SeparableLoss& loss, std::span<const double> x, double gamma);

void envelope_gradient(const SeparableLoss& loss, std::span<const double> x, double gamma, std::span<double> out);
Vector envelope_gradient(const SeparableLoss& loss, const Vector& x, double gamma);

// Elementwise Huber value and derivative over a matrix.
std::pair<double, Matrix> huber_value_grad(const Matrix& R, double mu);

// sqrt(sum over rows of sup|subgradient|^2); equals w*sqrt(r) for a single
// weighted L1 block. Used for the certificate's Lipschitz estimate.
double loss_lipschitz_bound(const SeparableLoss& loss);

}  // namespace dcra
