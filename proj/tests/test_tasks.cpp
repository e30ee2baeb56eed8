// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "dgs/optim.hpp"
#include "dgs/tasks.hpp"

using namespace dgs;

TEST_CASE("quadratic bowl basics") {
  auto task = make_quadratic_bowl(3, {1.0, -2.0, 0.5});
  ParamVector at_opt(task->partition(), {1.0, -2.0, 0.5});
  std::vector<std::uint32_t> batch{0};
  CHECK(task->loss(at_opt, batch) == 0.0);
  CHECK(l2_norm(task->grad(at_opt, batch)) == 0.0);

  ParamVector displaced(task->partition(), {2.0, -2.0, 0.5});  // optimum + e_0
  CHECK(task->loss(displaced, batch) == 0.5);
  ParamVector g = task->grad(displaced, batch);
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);

  CHECK(task->partition().layer_count() == 1);  // documented single-layer exception
  CHECK(std::isnan(task->accuracy(at_opt, batch)));
}

TEST_CASE("gradient descent on the bowl converges geometrically") {
  auto task = make_quadratic_bowl(2, {3.0, -1.0});
  std::vector<std::uint32_t> batch{0};
  ParamVector theta(task->partition(), {10.0, 4.0});
  double lr = 0.25;
  double d0_0 = 10.0 - 3.0, d0_1 = 4.0 + 1.0;
  for (int t = 1; t <= 100; ++t) {
    theta = sgd_step(theta, task->grad(theta, batch), lr);
    double decay = std::pow(1.0 - lr, t);
    CHECK(std::abs(theta[0] - (3.0 + decay * d0_0)) <= 1e-12);
    CHECK(std::abs(theta[1] - (-1.0 + decay * d0_1)) <= 1e-12);
  }
}

TEST_CASE("blobs dataset is reproducible and balanced with a disjoint split") {
  SyntheticDataset a = make_blobs_dataset(6, 100, 2.5, 99);
  SyntheticDataset b = make_blobs_dataset(6, 100, 2.5, 99);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.train_indices.size() == 80);
  CHECK(a.test_indices.size() == 20);
  for (std::uint32_t i : a.test_indices)
    CHECK(std::find(a.train_indices.begin(), a.train_indices.end(), i) ==
          a.train_indices.end());

  SyntheticDataset c = make_blobs_dataset(6, 100, 2.5, 100);
  CHECK(a.features != c.features);
}

TEST_CASE("logistic task: zero weights cost ln 2 per sample") {
  auto task = make_logistic_task(8, 100, 3.0, 7);
  ParamVector zeros(task->partition());
  CHECK(task->loss(zeros, task->dataset().train_indices) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(task->partition().layer_count() == 2);
  CHECK(task->is_classifier());
}

TEST_CASE("logistic task: converged model separates well-separated blobs") {
  auto task = make_logistic_task(4, 200, 8.0, 11);
  Hyperparams hp;
  hp.learning_rate = 0.5;
  hp.momentum = 0.9;
  Rng rng(1);
  ParamVector theta = task->initial_params(rng);
  VelocityState vel{ParamVector(task->partition()), 0};
  const auto& train = task->dataset().train_indices;
  for (int t = 0; t < 400; ++t) {
    MomentumResult r = momentum_step(vel, task->grad(theta, train), hp);
    vel = std::move(r.state);
    theta.add_scaled(r.update, -1.0);
  }
  CHECK(task->accuracy(theta, train) >= 0.99);
}

TEST_CASE("logistic gradient matches central differences") {
  auto task = make_logistic_task(5, 60, 2.0, 13);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> tv(task->partition().total_size());
    for (double& v : tv) v = 0.5 * rng.normal();
    ParamVector theta(task->partition(), std::move(tv));
    std::vector<std::uint32_t> batch;
    for (int i = 0; i < 8; ++i)
      batch.push_back(task->dataset().train_indices[rng.uniform_u32(48)]);
    CHECK(gradcheck(*task, theta, batch, 1e-5) <= 1e-6);
  }
}

TEST_CASE("mlp forward pass is finite from an all-zero-weights start") {
  auto task = make_mlp_task({2, 4, 1}, Activation::tanh, make_xor_dataset());
  // zero weights, bias breaking the symmetry
  std::vector<double> tv(task->partition().total_size(), 0.0);
  tv[task->partition().offset(1)] = 0.1;  // first hidden bias
  ParamVector theta(task->partition(), std::move(tv));
  std::vector<std::uint32_t> batch{0, 1, 2, 3};
  CHECK(std::isfinite(task->loss(theta, batch)));
  ParamVector g = task->grad(theta, batch);
  for (double v : g.values()) CHECK(std::isfinite(v));
  CHECK(task->partition().layer_count() == 4);  // W1, b1, W2, b2
}

TEST_CASE("mlp gradient matches central differences at random points") {
  auto task = make_mlp_task({3, 5, 1}, Activation::tanh, make_blobs_dataset(3, 40, 2.0, 17));
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    ParamVector theta = task->initial_params(rng);
    std::span<double> tv = theta.mutable_values();
    for (double& v : tv) v += 0.3 * rng.normal();
    std::vector<std::uint32_t> batch;
    for (int i = 0; i < 6; ++i)
      batch.push_back(task->dataset().train_indices[rng.uniform_u32(32)]);
    CHECK(gradcheck(*task, theta, batch, 1e-5) <= 1e-6);
  }
}

TEST_CASE("mlp drives the xor set below 0.1 loss within 2000 steps") {
  auto task = make_mlp_task({2, 6, 1}, Activation::tanh, make_xor_dataset());
  Rng rng(5);
  ParamVector theta = task->initial_params(rng);
  Hyperparams hp;
  hp.learning_rate = 0.5;
  hp.momentum = 0.9;
  VelocityState vel{ParamVector(task->partition()), 0};
  std::vector<std::uint32_t> batch{0, 1, 2, 3};
  double loss = task->loss(theta, batch);
  for (int t = 0; t < 2000 && loss >= 0.1; ++t) {
    MomentumResult r = momentum_step(vel, task->grad(theta, batch), hp);
    vel = std::move(r.state);
    theta.add_scaled(r.update, -1.0);
    loss = task->loss(theta, batch);
  }
  CHECK(loss < 0.1);
  CHECK(task->accuracy(theta, batch) == 1.0);
}

TEST_CASE("dataset CSV dump and load round-trips bit-exactly") {
  SyntheticDataset ds = make_blobs_dataset(5, 30, 2.5, 77);
  std::string csv = dataset_to_csv(ds);
  CHECK(csv.starts_with("label,split,f0,f1,f2,f3,f4\n"));
  SyntheticDataset back = dataset_from_csv(csv);
  CHECK(back.feature_dim == ds.feature_dim);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.train_indices == ds.train_indices);
  CHECK(back.test_indices == ds.test_indices);

  CHECK_THROWS_AS(dataset_from_csv(""), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("label,split,f0\n1,nope,0.5\n"), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("label,split,f0\n1,train\n"), ConfigError);
}

TEST_CASE("gradcheck on the quadratic bowl is tight") {
  auto task = make_quadratic_bowl(6, {1, 2, 3, -1, -2, -3});
  ParamVector theta(task->partition(), {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  std::vector<std::uint32_t> batch{0};
  CHECK(gradcheck(*task, theta, batch, 1e-5) <= 1e-10);
  CHECK_THROWS_AS(gradcheck(*task, theta, batch, 0.0), ConfigError);
}
