#include "doctest.h"

#include <cmath>

#include "agentnet/harness.hpp"
#include "agentnet/rng.hpp"
#include "agentnet/tensor.hpp"

using namespace agentnet;

TEST_CASE("elementwise and shape op forwards") {
  Tensor a = Tensor::constant(2, 2, {1, 2, 3, 4});
  Tensor b = Tensor::constant(2, 2, {5, 6, 7, 8});
  CHECK(add(a, b).value() == std::vector<double>{6, 8, 10, 12});
  CHECK(sub(b, a).value() == std::vector<double>{4, 4, 4, 4});
  CHECK(mul(a, b).value() == std::vector<double>{5, 12, 21, 32});
  CHECK(matmul(a, b).value() == std::vector<double>{19, 22, 43, 50});
  CHECK(transpose(a).value() == std::vector<double>{1, 3, 2, 4});
  CHECK(concat_cols({a, b}).at(1, 3) == 8);
  CHECK(gather_rows(a, {1, 0, 1}).rows() == 3);
  CHECK(slice_rows(a, 1, 1).value() == std::vector<double>{3, 4});
  CHECK(elem(b, 1, 0).scalar_value() == 7);
  CHECK(sum_all(a).scalar_value() == 10);
  CHECK(mean_rows(a).value() == std::vector<double>{2, 3});
  CHECK(max_rows(a).value() == std::vector<double>{3, 4});
  CHECK_THROWS(add(a, Tensor::constant(1, 2, {0, 0})));
  CHECK_THROWS(matmul(a, Tensor::constant(3, 1, {0, 0, 0})));
  CHECK_THROWS(gather_rows(a, {4}));
}

TEST_CASE("activation and normalization forwards") {
  Tensor x = Tensor::row({-1.0, 0.0, 2.0});
  CHECK(leaky_relu(x, 0.01).value() == std::vector<double>{-0.01, 0.0, 2.0});

  // Layer norm of a constant vector is zero before gain/bias.
  Tensor c = Tensor::row({3.0, 3.0, 3.0, 3.0});
  Tensor gain = Tensor::row({1, 1, 1, 1});
  Tensor bias = Tensor::row({0, 0, 0, 0});
  Tensor ln = layer_norm(c, gain, bias);
  for (double v : ln.value()) CHECK(v == doctest::Approx(0.0));

  Tensor s = softmax(Tensor::row({0.0, 0.0, 0.0}));
  for (double v : s.value()) CHECK(v == doctest::Approx(1.0 / 3.0));

  // Cross entropy on uniform logits is ln(C).
  CHECK(cross_entropy(Tensor::row({0, 0}), 0).scalar_value() == doctest::Approx(std::log(2.0)));
  CHECK_THROWS(cross_entropy(Tensor::row({0, 1}), 2));
}

TEST_CASE("group reductions") {
  // Groups {0,2}, {1}, {3,4,5} over row index.
  Tensor rows = Tensor::constant(6, 2, {1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6});
  std::vector<int> gids{0, 1, 0, 2, 2, 2};
  Tensor sum = segment_sum(rows, gids, 3);
  CHECK(sum.at(0, 0) == 4);
  CHECK(sum.at(1, 0) == 2);
  CHECK(sum.at(2, 0) == 15);
  Tensor mean = segment_mean(rows, gids, 3);
  CHECK(mean.at(0, 0) == 2);
  CHECK(mean.at(2, 1) == 5);
  Tensor mx = segment_max(rows, gids, 3);
  CHECK(mx.at(0, 0) == 3);
  CHECK(mx.at(2, 0) == 6);

  // log_scaled_sum: mean * ln(count + 1).
  Tensor single = log_scaled_sum(Tensor::constant(1, 2, {2.0, 4.0}), {0}, 1);
  CHECK(single.at(0, 0) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(single.at(0, 1) == doctest::Approx(4.0 * std::log(2.0)));
  Tensor twice = log_scaled_sum(Tensor::constant(2, 1, {3.0, 3.0}), {0, 0}, 1);
  CHECK(twice.at(0, 0) == doctest::Approx(3.0 * std::log(3.0)));

  CHECK_THROWS(segment_sum(rows, {0, 1}, 2));          // id count mismatch
  CHECK_THROWS(segment_sum(rows, {0, 1, 0, 2, 2, 9}, 3));  // id out of range
  CHECK_THROWS(log_scaled_sum(rows, {0, 0, 0, 0, 0, 0}, 2));  // empty group
}

TEST_CASE("segment means are exactly mean-zero after subtraction") {
  Rng rng(8);
  std::vector<double> vals(40);
  for (double& v : vals) v = rng.normal();
  Tensor rows = Tensor::constant(20, 2, std::vector<double>(vals));
  std::vector<int> gids;
  for (int i = 0; i < 20; ++i) gids.push_back(i % 4);
  Tensor mean = segment_mean(rows, gids, 4);
  std::vector<double> residual_sum(4 * 2, 0.0);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 2; ++j)
      residual_sum[gids[i] * 2 + j] += rows.at(i, j) - mean.at(gids[i], j);
  for (double r : residual_sum) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("backward matches finite differences on a matmul chain") {
  Rng rng(17);
  std::vector<double> flat(4 * 3 + 3 * 2, 0.0);
  for (double& v : flat) v = rng.normal();
  auto objective = [&](bool with_grad, std::vector<double>* grad_out) {
    Tape tape;
    Tensor w1 = tape.leaf(4, 3, flat.data());
    Tensor w2 = tape.leaf(3, 2, flat.data() + 12);
    Tensor x = Tensor::constant(2, 4, {0.5, -1, 2, 0.25, 1, 1, -0.5, 0.75});
    Tensor y = matmul(matmul(x, w1), w2);
    Tensor loss = sum_all(mul(y, y));
    if (with_grad) {
      tape.backward(loss);
      grad_out->clear();
      grad_out->insert(grad_out->end(), w1.grad().begin(), w1.grad().end());
      grad_out->insert(grad_out->end(), w2.grad().begin(), w2.grad().end());
    }
    return loss.scalar_value();
  };
  auto value = [&]() { return objective(false, nullptr); };
  auto gradient = [&]() {
    std::vector<double> g;
    objective(true, &g);
    return g;
  };
  GradCheckResult r = grad_check(value, gradient, flat, 1e-6);
  CHECK(r.max_rel_error < 1e-7);
  CHECK(r.excluded == 0);
}

TEST_CASE("every differentiable op passes its finite-difference check") {
  for (const auto& check : run_op_grad_checks(99)) {
    INFO(check.op, " max rel ", check.result.max_rel_error);
    CHECK(check.pass);
    CHECK(check.result.max_rel_error < 1e-6);
  }
}

TEST_CASE("gumbel softmax straight-through") {
  // Forward is always a valid one-hot.
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> noise(4);
    for (double& x : noise) x = rng.gumbel();
    Tensor logits = Tensor::row({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
    Tensor y = gumbel_softmax_st(logits, 2.0 / 3.0, noise);
    double sum = 0;
    int nonzero = 0;
    for (double v : y.value()) {
      sum += v;
      if (v != 0.0) nonzero += 1;
      CHECK((v == 0.0 || v == 1.0));
    }
    CHECK(sum == 1.0);
    CHECK(nonzero == 1);
  }

  // A dominant logit wins essentially always.
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> noise(3);
    for (double& x : noise) x = rng.gumbel();
    int arg = -1;
    gumbel_softmax_st(Tensor::row({1000.0, 0.0, 0.0}), 2.0 / 3.0, noise, &arg);
    if (arg == 0) hits += 1;
  }
  CHECK(hits >= 999);

  CHECK_THROWS(gumbel_softmax_st(Tensor::row({1.0, 2.0}), 0.0, {0.0, 0.0}));
  CHECK_THROWS(gumbel_softmax_st(Tensor::row({1.0 / 0.0, 2.0}), 1.0, {0.0, 0.0}));
}

TEST_CASE("kinks are excluded rather than failed") {
  // leaky_relu evaluated exactly at its corner: the coordinate must be
  // reported as excluded.
  std::vector<double> flat{0.0, 1.0};
  auto value = [&]() {
    Tape tape;
    Tensor x = tape.leaf(1, 2, flat.data());
    return sum_all(leaky_relu(x, 0.01)).scalar_value();
  };
  auto gradient = [&]() {
    Tape tape;
    Tensor x = tape.leaf(1, 2, flat.data());
    Tensor loss = sum_all(leaky_relu(x, 0.01));
    tape.backward(loss);
    return x.grad();
  };
  GradCheckResult r = grad_check(value, gradient, flat, 1e-5);
  CHECK(r.excluded == 1);
  CHECK(r.checked == 1);
  CHECK(r.max_rel_error < 1e-9);
}
