// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/worker.hpp"

#include <cmath>

namespace dgs {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::dense: return "dense";
    case Strategy::residual: return "residual";
    case Strategy::dgc: return "dgc";
    case Strategy::samomentum: return "samomentum";
  }
  return "?";
}

WorkerNode::WorkerNode(std::uint32_t id, Strategy strategy, ParamVector theta0,
                       Hyperparams hp, SparsifyConfig cfg, std::uint64_t seed,
                       std::uint32_t steps_per_epoch)
    : id_(id),
      strategy_(strategy),
      theta_(std::move(theta0)),
      hp_(std::move(hp)),
      cfg_(cfg),
      rng_(seed, 2ULL * id),
      steps_per_epoch_(steps_per_epoch == 0 ? 1 : steps_per_epoch) {
  hp_.validate();
  if (strategy_ == Strategy::residual || strategy_ == Strategy::dgc)
    residual_.emplace(theta_.partition());
  if (strategy_ == Strategy::dgc || strategy_ == Strategy::samomentum)
    velocity_.emplace(VelocityState{ParamVector(theta_.partition()), 0});
  if (strategy_ == Strategy::samomentum && !(hp_.momentum > 0.0 && hp_.momentum < 1.0))
    throw ConfigError("worker: samomentum requires momentum in (0, 1)");
}

std::vector<std::uint32_t> WorkerNode::sample_batch(const Task& task,
                                                    std::uint32_t batch_size) {
  const std::vector<std::uint32_t>& train = task.dataset().train_indices;
  std::vector<std::uint32_t> batch(batch_size);
  for (std::uint32_t& b : batch)
    b = train[rng_.uniform_u32(static_cast<std::uint32_t>(train.size()))];
  return batch;
}

SparseUpdate WorkerNode::compute_step(const Task& task, std::span<const std::uint32_t> batch) {
  std::uint32_t ep = epoch();
  SparseUpdate up;
  try {
    ParamVector grad = task.grad(theta_, batch);
    switch (strategy_) {
      case Strategy::dense: {
        grad.scale(hp_.lr_at(ep));
        up = to_sparse(grad);
        break;
      }
      case Strategy::residual: {
        residual_->add_scaled(grad, hp_.lr_at(ep));
        SplitResult split = split_residual(*residual_, cfg_);
        *residual_ = std::move(split.kept);
        up = std::move(split.sent);
        break;
      }
      case Strategy::dgc: {
        DgcStepResult r = dgc_correction_step(*velocity_, *residual_, grad, hp_, cfg_, ep);
        *velocity_ = std::move(r.state);
        *residual_ = std::move(r.residual);
        up = std::move(r.sent);
        break;
      }
      case Strategy::samomentum: {
        SamomentumResult r = samomentum_step(*velocity_, grad, hp_, cfg_, ep);
        *velocity_ = std::move(r.state);
        up = std::move(r.sent);
        break;
      }
    }
  } catch (const NumericError& e) {
    throw DivergedError(step_, std::string("worker diverged: ") + e.what());
  } catch (const InvariantError& e) {
    // a task handing back non-finite gradients trips the vector invariant
    throw DivergedError(step_, std::string("worker diverged: ") + e.what());
  }
  ++step_;
  up.worker_id = id_;
  up.timestamp = step_;
  return up;
}

void WorkerNode::apply_downward(const SparseUpdate& down) {
  try {
    apply_sparse(theta_, down, 1.0);
  } catch (const NumericError&) {
    throw DivergedError(step_, "worker: non-finite model after downward update");
  }
}

const ParamVector* WorkerNode::velocity() const {
  return velocity_ ? &velocity_->u : nullptr;
}

const ParamVector* WorkerNode::residual() const {
  return residual_ ? &*residual_ : nullptr;
}

}  // namespace dgs
