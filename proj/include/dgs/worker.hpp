// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dgs/optim.hpp"
#include "dgs/rng.hpp"
#include "dgs/sparsify.hpp"
#include "dgs/tasks.hpp"
#include "dgs/tensor.hpp"

namespace dgs {

enum class Strategy { dense, residual, dgc, samomentum };

const char* strategy_name(Strategy s);

// One training worker. Owns its local model, the strategy-specific side
// state (a residual accumulator, a velocity, or both), and the seeded data
// stream. Cross-worker interaction happens only through sparse updates.
class WorkerNode {
 public:
  WorkerNode(std::uint32_t id, Strategy strategy, ParamVector theta0, Hyperparams hp,
             SparsifyConfig cfg, std::uint64_t seed, std::uint32_t steps_per_epoch);

  // Uniform i.i.d. batch over the task's training indices.
  std::vector<std::uint32_t> sample_batch(const Task& task, std::uint32_t batch_size);

  // Runs one gradient computation and produces the upward update for this
  // strategy. Throws DivergedError (with the local step) on a non-finite
  // gradient.
  SparseUpdate compute_step(const Task& task, std::span<const std::uint32_t> batch);

  // theta += delta; the downward delta already carries sign and learning
  // rate, so no further scaling happens here.
  void apply_downward(const SparseUpdate& down);

  std::uint32_t id() const { return id_; }
  Strategy strategy() const { return strategy_; }
  const ParamVector& model() const { return theta_; }
  std::uint64_t step() const { return step_; }
  std::uint32_t epoch() const { return static_cast<std::uint32_t>(step_ / steps_per_epoch_); }
  const Hyperparams& hyperparams() const { return hp_; }

  const ParamVector* velocity() const;
  const ParamVector* residual() const;

 private:
  std::uint32_t id_;
  Strategy strategy_;
  ParamVector theta_;
  Hyperparams hp_;
  SparsifyConfig cfg_;
  Rng rng_;
  std::uint32_t steps_per_epoch_;
  std::uint64_t step_ = 0;

  std::optional<ParamVector> residual_;       // residual, dgc
  std::optional<VelocityState> velocity_;     // dgc, samomentum
};

}  // namespace dgs
