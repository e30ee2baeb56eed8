// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>

#include "dgs/rng.hpp"
#include "dgs/server.hpp"

using namespace dgs;

namespace {

ParamVector vec(std::initializer_list<double> vals) {
  std::vector<double> v(vals);
  LayerPartition part = LayerPartition::single(static_cast<std::uint32_t>(v.size()));
  return ParamVector(std::move(part), std::move(v));
}

}  // namespace

TEST_CASE("registration starts zero accumulators; duplicates are rejected") {
  ServerNode server(LayerPartition::single(3));
  for (std::uint32_t k = 0; k < 4; ++k) server.register_worker(k);
  for (std::uint32_t k = 0; k < 4; ++k) {
    CHECK(l2_norm(server.sent_accumulator(k)) == 0.0);
    CHECK(server.prev(k) == 0);
  }
  CHECK_THROWS_AS(server.register_worker(2), InvariantError);
  CHECK_THROWS_AS(server.on_gradient(9, SparseUpdate{9, 0, 3, {}}), InvariantError);
}

TEST_CASE("empty upward update leaves state unchanged except the clock") {
  ServerNode server(LayerPartition::single(2));
  server.register_worker(0);
  SparseUpdate g{0, 0, 2, {}};
  ServerNode::ExchangeResult r = server.on_gradient(0, g);
  CHECK(r.down.empty());
  CHECK(r.staleness == 0);
  CHECK(server.timestamp() == 1);
  CHECK(server.prev(0) == 1);
  CHECK(l2_norm(server.model_difference()) == 0.0);
  CHECK(l2_norm(server.sent_accumulator(0)) == 0.0);
}

TEST_CASE("exchange applies the update and returns the catch-up delta") {
  // Prime M to [1,2] through a first worker, then exchange with a fresh one.
  ServerNode server(LayerPartition::single(2));
  server.register_worker(0);
  server.register_worker(1);
  server.on_gradient(0, SparseUpdate{0, 0, 2, {{0, -1.0}, {1, -2.0}}});
  CHECK(server.model_difference() == vec({1.0, 2.0}));

  // worker 1: v=[0,0], sends g={(0,0.5)}
  ServerNode::ExchangeResult r = server.on_gradient(1, SparseUpdate{1, 0, 2, {{0, 0.5}}});
  CHECK(server.model_difference() == vec({0.5, 2.0}));
  REQUIRE(r.down.nnz() == 2);
  CHECK(r.down.entries[0] == SparseEntry{0, 0.5});
  CHECK(r.down.entries[1] == SparseEntry{1, 2.0});
  CHECK(server.sent_accumulator(1) == vec({0.5, 2.0}));
  CHECK(server.sent_accumulator(1) == server.model_difference());
  CHECK(r.staleness == 1);  // one update (worker 0's) happened since prev=0
}

TEST_CASE("secondary compression delivers only the per-layer top entries") {
  ServerNode server(LayerPartition::single(2), SparsifyConfig(50.0));
  server.register_worker(0);
  server.register_worker(1);
  server.on_gradient(0, SparseUpdate{0, 0, 2, {{0, -1.0}, {1, -2.0}}});

  ServerNode::ExchangeResult r = server.on_gradient(1, SparseUpdate{1, 0, 2, {{0, 0.5}}});
  // full delta would be [0.5, 2]; keep-1-of-2 sends only the larger one
  REQUIRE(r.down.nnz() == 1);
  CHECK(r.down.entries[0] == SparseEntry{1, 2.0});
  CHECK(server.sent_accumulator(1) == vec({0.0, 2.0}));

  // the pending remainder is exactly the undelivered part
  ParamVector pending = server.model_difference();
  pending.add_scaled(server.sent_accumulator(1), -1.0);
  CHECK(pending == vec({0.5, 0.0}));
}

TEST_CASE("first exchange of a late worker returns everything missed so far") {
  ServerNode server(LayerPartition::single(3));
  server.register_worker(0);
  server.register_worker(1);
  server.on_gradient(0, SparseUpdate{0, 0, 3, {{0, -0.25}}});
  server.on_gradient(0, SparseUpdate{0, 0, 3, {{2, 0.75}}});

  ServerNode::ExchangeResult r = server.on_gradient(1, SparseUpdate{1, 0, 3, {}});
  CHECK(densify(r.down, LayerPartition::single(3)) == server.model_difference());
  CHECK(r.staleness == 2);
}

TEST_CASE("sent accumulator equals the model difference after every exchange") {
  Rng rng(61);
  LayerPartition part(std::vector<std::uint32_t>{5, 3});
  ServerNode server(part);
  for (std::uint32_t k = 0; k < 3; ++k) server.register_worker(k);

  for (int t = 0; t < 200; ++t) {
    std::uint32_t k = rng.uniform_u32(3);
    SparseUpdate g;
    g.worker_id = k;
    g.dim = part.total_size();
    for (std::uint32_t i = 0; i < g.dim; ++i)
      if (rng.uniform01() < 0.4) g.entries.push_back({i, rng.normal()});
    server.on_gradient(k, g);
    CHECK(server.sent_accumulator(k) == server.model_difference());
    CHECK(server.timestamp() == static_cast<std::uint64_t>(t + 1));
  }
}

TEST_CASE("global model adds the accumulated difference to the start point") {
  ServerNode server(LayerPartition::single(2));
  server.register_worker(0);
  ParamVector theta0 = vec({10.0, -3.0});
  CHECK(server.global_model(theta0) == theta0);  // t = 0

  // one dense update g = lr*grad
  server.on_gradient(0, SparseUpdate{0, 0, 2, {{0, 0.1}, {1, -0.2}}});
  CHECK(server.global_model(theta0) == vec({9.9, -2.8}));
}

TEST_CASE("snapshot reports clock, prev and pending residual norms") {
  ServerNode server(LayerPartition::single(2), SparsifyConfig(50.0));
  server.register_worker(0);
  server.register_worker(1);
  server.on_gradient(0, SparseUpdate{0, 0, 2, {{0, -3.0}, {1, -4.0}}});

  ServerSnapshot s = server.snapshot();
  CHECK(s.t == 1);
  CHECK(s.prev.at(0) == 1);
  CHECK(s.prev.at(1) == 0);
  // worker 0 got the top entry (4.0), leaving |3| pending; worker 1 has all 5
  CHECK(s.residual_l2.at(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.residual_l2.at(1) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("non-finite accumulation surfaces as a numeric error") {
  ServerNode server(LayerPartition::single(1));
  server.register_worker(0);
  server.on_gradient(0, SparseUpdate{0, 0, 1, {{0, -1e308}}});
  CHECK_THROWS_AS(server.on_gradient(0, SparseUpdate{0, 0, 1, {{0, -1e308}}}),
                  NumericError);
}
