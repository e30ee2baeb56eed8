// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dgs/sparsify.hpp"
#include "dgs/tensor.hpp"

namespace dgs {

struct LrDecay {
  std::uint32_t epoch;
  double factor;
};

struct Hyperparams {
  double learning_rate = 0.1;
  double momentum = 0.0;
  std::vector<LrDecay> lr_schedule;  // step decay, strictly increasing epochs

  void validate() const;
  // Base rate times every decay factor whose epoch has been reached.
  double lr_at(std::uint32_t epoch) const;
};

struct VelocityState {
  ParamVector u;
  std::uint64_t step = 0;  // local step counter
};

// theta' = theta - lr * grad
ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double lr);

struct MomentumResult {
  VelocityState state;
  ParamVector update;  // caller applies theta -= update
};

// u' = m*u + lr*grad; the returned update is u'.
MomentumResult momentum_step(const VelocityState& state, const ParamVector& grad,
                             const Hyperparams& hp, std::uint32_t epoch = 0);

// Sparse momentum baseline that feeds the velocity from sent values only:
// the dropped remainder accumulates in a residual and never enters the
// velocity until it is sent. Kept as the degraded reference behaviour.
struct BrokenSparseMomentumState {
  VelocityState velocity;
  ParamVector residual;
};

struct BrokenStepResult {
  BrokenSparseMomentumState state;
  SparseUpdate sent;
};

BrokenStepResult broken_sparse_momentum_step(const BrokenSparseMomentumState& state,
                                             const ParamVector& grad,
                                             const Hyperparams& hp,
                                             const SparsifyConfig& cfg,
                                             std::uint32_t epoch = 0);
BrokenStepResult broken_sparse_momentum_step_with_mask(
    const BrokenSparseMomentumState& state, const ParamVector& grad,
    const Hyperparams& hp, std::span<const std::uint32_t> mask,
    std::uint32_t epoch = 0);

// Momentum correction: a dense local velocity accumulates every gradient,
// and the residual accumulates the velocity until selection sends it.
struct DgcStepResult {
  VelocityState state;
  ParamVector residual;
  SparseUpdate sent;
};

DgcStepResult dgc_correction_step(const VelocityState& state, const ParamVector& residual,
                                  const ParamVector& grad, const Hyperparams& hp,
                                  const SparsifyConfig& cfg, std::uint32_t epoch = 0);
DgcStepResult dgc_correction_step_with_mask(const VelocityState& state,
                                            const ParamVector& residual,
                                            const ParamVector& grad,
                                            const Hyperparams& hp,
                                            std::span<const std::uint32_t> mask,
                                            std::uint32_t epoch = 0);

// Sparsification-aware momentum: u_tmp = m*u + lr*grad, selected components
// are sent (and stay in the velocity), the rest are rescaled by 1/m. No
// separate residual accumulator exists. Requires 0 < m < 1.
struct SamomentumResult {
  VelocityState state;
  SparseUpdate sent;
};

SamomentumResult samomentum_step(const VelocityState& state, const ParamVector& grad,
                                 const Hyperparams& hp, const SparsifyConfig& cfg,
                                 std::uint32_t epoch = 0);
SamomentumResult samomentum_step_with_mask(const VelocityState& state,
                                           const ParamVector& grad, const Hyperparams& hp,
                                           std::span<const std::uint32_t> mask,
                                           std::uint32_t epoch = 0);

}  // namespace dgs
