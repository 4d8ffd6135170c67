#include "doctest.h"

#include <cmath>

#include "agentnet/nn.hpp"
#include "agentnet/rng.hpp"

using namespace agentnet;

TEST_CASE("param store layout, init, serialization") {
  ParamStore store;
  size_t a = store.add("a", 2, 3);
  size_t b = store.add("b", 1, 4);
  CHECK(store.total_size() == 10);
  CHECK_THROWS(store.add("a", 1, 1));

  Rng rng(5);
  store.fill_kaiming_uniform(a, rng);
  store.fill(b, 0.25);
  for (double v : store.view(a)) CHECK(std::abs(v) <= 1.0 / std::sqrt(2.0));

  ParamStore back = ParamStore::from_json(store.to_json());
  CHECK(back.values() == store.values());
  CHECK(back.content_hash() == store.content_hash());
  back.view(b)[0] = 9.0;
  CHECK(back.content_hash() != store.content_hash());
}

TEST_CASE("mlp block is the identity when the output affine is zero") {
  ParamStore store;
  MlpBlock block = MlpBlock::create(store, "blk", 6, 4, 3);
  Rng rng(2);
  block.init(store, rng, /*zero_output=*/true);

  Tape tape;
  BoundParams bp = bind_params(store, &tape);
  Tensor residual = Tensor::constant(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor input = Tensor::constant(2, 6, {0.5, -1, 2, 0.3, 1, -2, 0, 1, 2, 3, 4, 5});
  Tensor out = block.apply(bp, residual, input);
  CHECK(out.value() == residual.value());  // exact

  // Non-zero output layers change the result.
  block.init(store, rng, /*zero_output=*/false);
  BoundParams bp2 = bind_params(store, nullptr);
  Tensor out2 = block.apply(bp2, residual, input);
  CHECK(out2.value() != residual.value());
}

TEST_CASE("sinusoidal time embedding") {
  auto e0 = sinusoidal_time_embedding(0, 8);
  for (int i = 0; i < 4; ++i) {
    CHECK(e0[2 * i] == 0.0);      // sin components
    CHECK(e0[2 * i + 1] == 1.0);  // cos components
  }
  auto e1 = sinusoidal_time_embedding(1, 8);
  auto e2 = sinusoidal_time_embedding(2, 8);
  for (int i = 0; i < 4; ++i) {
    bool differs = e1[2 * i] != e2[2 * i] || e1[2 * i + 1] != e2[2 * i + 1];
    CHECK(differs);  // every frequency band separates t=1 from t=2
  }
  double norm = 0;
  for (double v : e1) norm += v * v;
  CHECK(std::sqrt(norm) <= std::sqrt(8.0) + 1e-12);
  CHECK_THROWS(sinusoidal_time_embedding(1, 7));
}

TEST_CASE("adamw closed-form behavior") {
  // Zero gradients, no decay: parameters unchanged.
  {
    AdamW opt;
    opt.weight_decay = 0.0;
    std::vector<double> p{1.0, -2.0};
    opt.step(p, {0.0, 0.0});
    CHECK(p == std::vector<double>{1.0, -2.0});
  }
  // Zero gradients with decoupled decay: exact multiplicative shrink.
  {
    AdamW opt;
    opt.lr = 1e-4;
    opt.weight_decay = 0.1;
    std::vector<double> p{1.0, -2.0};
    opt.step(p, {0.0, 0.0});
    CHECK(p[0] == doctest::Approx(1.0 * (1 - 1e-5)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(-2.0 * (1 - 1e-5)).epsilon(1e-12));
  }
  // One step on a constant gradient moves by about -lr * sign(g).
  {
    AdamW opt;
    opt.lr = 1e-3;
    opt.weight_decay = 0.0;
    std::vector<double> p{0.0};
    opt.step(p, {4.0});
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  }
  // Three steps against an independent scalar recurrence, to 1e-12.
  {
    AdamW opt;
    opt.lr = 0.01;
    opt.weight_decay = 0.0;
    std::vector<double> p{0.5};
    double x = 0.5, m = 0, v = 0;
    for (int t = 1; t <= 3; ++t) {
      double g = 2.0 * x + 0.3;  // gradient of x^2 + 0.3 x at the reference point
      opt.step(p, {2.0 * p[0] + 0.3});
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      double mhat = m / (1 - std::pow(0.9, t));
      double vhat = v / (1 - std::pow(0.999, t));
      x -= 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
      CHECK(std::abs(p[0] - x) < 1e-12);
    }
  }
  // Non-finite gradients abort the step.
  {
    AdamW opt;
    std::vector<double> p{1.0};
    CHECK_THROWS(opt.step(p, {std::nan("")}));
    CHECK(p[0] == 1.0);
  }
}

TEST_CASE("cosine learning rate schedule") {
  CHECK(cosine_lr(0, 10000) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(cosine_lr(10000, 10000) == doctest::Approx(1e-11).epsilon(1e-9));
  CHECK(cosine_lr(5000, 10000) == doctest::Approx((1e-4 + 1e-11) / 2).epsilon(1e-9));
  double prev = cosine_lr(0, 1000);
  for (int s = 1; s <= 1000; ++s) {
    double lr = cosine_lr(s, 1000);
    CHECK(lr <= prev + 1e-18);
    prev = lr;
  }
  CHECK_THROWS(cosine_lr(11, 10));
}

TEST_CASE("global norm clipping") {
  std::vector<double> g{0.3, 0.4};  // norm 0.5
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(0.5));
  CHECK(g == std::vector<double>{0.3, 0.4});

  std::vector<double> big(16, 1.0);  // norm 4
  double pre = clip_global_norm(big, 1.0);
  CHECK(pre == doctest::Approx(4.0));
  double norm = 0;
  for (double v : big) norm += v * v;
  CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);

  std::vector<double> zero(4, 0.0);
  clip_global_norm(zero, 1.0);
  CHECK(zero == std::vector<double>(4, 0.0));
}
