#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dcra/loss.hpp"
#include "dcra/rng.hpp"
#include "test_util.hpp"

using namespace dcra;

namespace {

SeparableLoss l1_loss(int rows, double w = 1.0) { return SeparableLoss({LossBlock::l1(rows, w)}); }

// independent 1-D prox oracle: argmin_y block_value(y) + (y-x)^2/(2 gamma)
double prox_1d_oracle(const std::function<double(double)>& value, double x, double gamma) {
  const double radius = std::abs(x) + 10.0 * gamma + 10.0;
  return testutil::golden_min(
      [&](double y) { return value(y) + (y - x) * (y - x) / (2.0 * gamma); }, x - radius, x + radius);
}

double huber_scalar(double t, double mu) {
  const double a = std::abs(t);
  return a <= mu ? t * t / (2.0 * mu) : a - mu / 2.0;
}

struct RandomBlockCase {
  SeparableLoss loss;
  Vector x;
  double gamma;
};

RandomBlockCase random_case(LossKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const int rows = 1 + static_cast<int>(rng.next_u64() % 8);
  const double gamma = 0.05 + rng.uniform01();
  std::vector<LossBlock> blocks;
  switch (kind) {
    case LossKind::L1:
      blocks.push_back(LossBlock::l1(rows, 0.25 + rng.uniform01()));
      break;
    case LossKind::Linear: {
      Vector c(static_cast<std::size_t>(rows));
      for (auto& v : c) v = rng.normal();
      blocks.push_back(LossBlock::linear(std::move(c)));
      break;
    }
    case LossKind::Huber:
      blocks.push_back(LossBlock::huber(rows, 0.1 + rng.uniform01()));
      break;
  }
  RandomBlockCase out{SeparableLoss(std::move(blocks)), Vector(static_cast<std::size_t>(rows)), gamma};
  for (auto& v : out.x) v = 3.0 * rng.normal();
  return out;
}

}  // namespace

TEST_CASE("loss_value worked examples") {
  CHECK(loss_value(l1_loss(3), Vector{2, -0.3, 0}) == doctest::Approx(2.3));
  CHECK(loss_value(SeparableLoss({LossBlock::linear({2, 0})}), Vector{1, 1}) == doctest::Approx(2.0));
  CHECK(loss_value(SeparableLoss({LossBlock::l1(2), LossBlock::linear({1})}), Vector{1, -1, 3}) ==
        doctest::Approx(5.0));
  CHECK_THROWS(loss_value(l1_loss(3), Vector{1, 2}));
}

TEST_CASE("prox worked examples") {
  const Vector p = prox(l1_loss(3), Vector{2, -0.3, 0}, 0.5);
  CHECK(p[0] == doctest::Approx(1.5));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(p[2] == doctest::Approx(0.0));

  const Vector q = prox(SeparableLoss({LossBlock::linear({2, 0})}), Vector{1, 1}, 0.5);
  CHECK(q[0] == doctest::Approx(0.0));
  CHECK(q[1] == doctest::Approx(1.0));

  // gamma -> 0 at a smooth point approaches the identity
  const Vector tiny = prox(l1_loss(1), Vector{2.0}, 1e-12);
  CHECK(tiny[0] == doctest::Approx(2.0).epsilon(1e-10));

  CHECK_THROWS(prox(l1_loss(1), Vector{1.0}, 0.0));
  CHECK_THROWS(prox(l1_loss(1), Vector{1.0}, -1.0));
}

TEST_CASE("envelope worked examples") {
  CHECK(envelope(l1_loss(1), Vector{2}, 0.5) == doctest::Approx(1.75));
  CHECK(envelope(l1_loss(1), Vector{0.3}, 0.5) == doctest::Approx(0.09));
  CHECK(envelope(SeparableLoss({LossBlock::linear({2, 0})}), Vector{1, 1}, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("envelope_gradient worked examples") {
  CHECK(envelope_gradient(l1_loss(1), Vector{2}, 0.5)[0] == doctest::Approx(1.0));
  CHECK(envelope_gradient(l1_loss(1), Vector{0}, 0.7)[0] == doctest::Approx(0.0));
}

TEST_CASE("huber_value_grad worked examples and finite differences") {
  Matrix R0(1, 1);
  auto [v0, g0] = huber_value_grad(R0, 1.0);
  CHECK(v0 == doctest::Approx(0.0));
  CHECK(g0(0, 0) == doctest::Approx(0.0));

  Matrix R1(1, 1);
  R1(0, 0) = 2.0;
  auto [v1, g1] = huber_value_grad(R1, 1.0);
  CHECK(v1 == doctest::Approx(1.5));
  CHECK(g1(0, 0) == doctest::Approx(1.0));

  CHECK_THROWS(huber_value_grad(R1, 0.0));

  const Matrix R = testutil::random_matrix(3, 3, 11);
  const double mu = 0.4;
  auto [val, grad] = huber_value_grad(R, mu);
  (void)val;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      Matrix Rp = R, Rm = R;
      Rp(i, j) += h;
      Rm(i, j) -= h;
      const double fd = (huber_value_grad(Rp, mu).first - huber_value_grad(Rm, mu).first) / (2.0 * h);
      CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("huber prox closed form matches the golden-section oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = 0.1 + rng.uniform01();
    const double gamma = 0.05 + rng.uniform01();
    const double x = 4.0 * rng.normal();
    const SeparableLoss loss({LossBlock::huber(1, mu)});
    const double got = prox(loss, Vector{x}, gamma)[0];
    const double want = prox_1d_oracle([&](double y) { return huber_scalar(y, mu); }, x, gamma);
    CHECK(got == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("weighted l1 prox matches the golden-section oracle") {
  Rng rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const double w = 0.25 + rng.uniform01();
    const double gamma = 0.05 + rng.uniform01();
    const double x = 4.0 * rng.normal();
    const SeparableLoss loss({LossBlock::l1(1, w)});
    const double got = prox(loss, Vector{x}, gamma)[0];
    const double want = prox_1d_oracle([&](double y) { return w * std::abs(y); }, x, gamma);
    CHECK(got == doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("envelope-prox identity, lower bound, gamma monotonicity, nonexpansiveness") {
  const LossKind kinds[] = {LossKind::L1, LossKind::Linear, LossKind::Huber};
  for (LossKind kind : kinds) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto cs = random_case(kind, 1000 * static_cast<std::uint64_t>(kind) + seed);
      const Vector px = prox(cs.loss, cs.x, cs.gamma);
      double dist_sq = 0.0;
      for (std::size_t i = 0; i < cs.x.size(); ++i) {
        const double d = cs.x[i] - px[i];
        dist_sq += d * d;
      }
      const double env = envelope(cs.loss, cs.x, cs.gamma);
      const double via_prox = loss_value(cs.loss, px) + dist_sq / (2.0 * cs.gamma);
      CHECK(env == doctest::Approx(via_prox).epsilon(1e-10));

      CHECK(env <= loss_value(cs.loss, cs.x) + 1e-12 * (1.0 + std::abs(env)));

      const double env_wider = envelope(cs.loss, cs.x, cs.gamma * 1.7);
      CHECK(env_wider <= env + 1e-12 * (1.0 + std::abs(env)));

      // nonexpansiveness against a second point
      Rng rng(777 + seed);
      Vector y = cs.x;
      for (auto& v : y) v += rng.normal();
      const Vector py = prox(cs.loss, y, cs.gamma);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        num += (px[i] - py[i]) * (px[i] - py[i]);
        den += (cs.x[i] - y[i]) * (cs.x[i] - y[i]);
      }
      CHECK(num <= den * (1.0 + 1e-12) + 1e-15);
    }
  }
}

TEST_CASE("envelope gradient matches central differences away from kinks") {
  const LossKind kinds[] = {LossKind::L1, LossKind::Linear, LossKind::Huber};
  const double fd_step = 1e-6;
  for (LossKind kind : kinds) {
    int accepted = 0;
    for (std::uint64_t seed = 0; accepted < 50 && seed < 500; ++seed) {
      const auto cs = random_case(kind, 5000 * static_cast<std::uint64_t>(kind) + seed);
      if (kind == LossKind::L1) {
        // stay 10 fd-steps away from the |x| = gamma*w gradient kink
        const double thr = cs.gamma * cs.loss.blocks[0].weight;
        bool near = false;
        for (double v : cs.x)
          if (std::abs(std::abs(v) - thr) < 10.0 * fd_step * std::max(1.0, std::abs(v))) near = true;
        if (near) continue;
      }
      ++accepted;
      const Vector grad = envelope_gradient(cs.loss, cs.x, cs.gamma);
      const Vector fd = testutil::fd_gradient(
          [&](const Vector& v) { return envelope(cs.loss, v, cs.gamma); }, cs.x, fd_step);
      for (std::size_t i = 0; i < grad.size(); ++i)
        CHECK(grad[i] == doctest::Approx(fd[i]).epsilon(1e-6).scale(1.0));
    }
    CHECK(accepted == 50);
  }
}

TEST_CASE("block construction invariants") {
  CHECK_THROWS(LossBlock::l1(0));
  CHECK_THROWS(LossBlock::l1(2, -1.0));
  CHECK_THROWS(LossBlock::huber(2, 0.0));
  CHECK_THROWS(LossBlock::linear({}));
  CHECK(loss_lipschitz_bound(l1_loss(9)) == doctest::Approx(3.0));
}
