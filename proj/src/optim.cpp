// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/optim.hpp"

#include <optional>

namespace dgs {

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("hyperparams: learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("hyperparams: momentum must be in [0, 1)");
  std::int64_t last = -1;
  for (const LrDecay& d : lr_schedule) {
    if (static_cast<std::int64_t>(d.epoch) <= last)
      throw ConfigError("hyperparams: lr schedule epochs must be strictly increasing");
    if (!(d.factor > 0.0)) throw ConfigError("hyperparams: lr decay factor must be > 0");
    last = d.epoch;
  }
}

double Hyperparams::lr_at(std::uint32_t epoch) const {
  double lr = learning_rate;
  for (const LrDecay& d : lr_schedule)
    if (epoch >= d.epoch) lr *= d.factor;
  return lr;
}

ParamVector sgd_step(const ParamVector& theta, const ParamVector& grad, double lr) {
  ParamVector out = theta;
  out.add_scaled(grad, -lr);
  return out;
}

namespace {

// u' = m*u + lr*grad with the step counter advanced.
VelocityState advance_velocity(const VelocityState& state, const ParamVector& grad,
                               double m, double lr) {
  VelocityState next{state.u, state.step + 1};
  next.u.scale(m);
  next.u.add_scaled(grad, lr);
  return next;
}

}  // namespace

MomentumResult momentum_step(const VelocityState& state, const ParamVector& grad,
                             const Hyperparams& hp, std::uint32_t epoch) {
  VelocityState next = advance_velocity(state, grad, hp.momentum, hp.lr_at(epoch));
  ParamVector update = next.u;
  return {std::move(next), std::move(update)};
}

namespace {

BrokenStepResult broken_step_impl(const BrokenSparseMomentumState& state,
                                  const ParamVector& grad, const Hyperparams& hp,
                                  std::uint32_t epoch,
                                  const SparsifyConfig* cfg,
                                  std::span<const std::uint32_t> mask) {
  double lr = hp.lr_at(epoch);
  BrokenSparseMomentumState next = state;
  next.residual.add_scaled(grad, lr);
  SplitResult split = cfg ? split_residual(next.residual, *cfg)
                          : split_residual_with_mask(next.residual, mask);
  next.residual = std::move(split.kept);
  // Only delivered values feed the velocity; dropped mass sits in the
  // residual outside any momentum discounting.
  next.velocity.u.scale(hp.momentum);
  apply_sparse(next.velocity.u, split.sent, 1.0);
  next.velocity.step = state.velocity.step + 1;
  split.sent.timestamp = next.velocity.step;
  return {std::move(next), std::move(split.sent)};
}

}  // namespace

BrokenStepResult broken_sparse_momentum_step(const BrokenSparseMomentumState& state,
                                             const ParamVector& grad,
                                             const Hyperparams& hp,
                                             const SparsifyConfig& cfg,
                                             std::uint32_t epoch) {
  return broken_step_impl(state, grad, hp, epoch, &cfg, {});
}

BrokenStepResult broken_sparse_momentum_step_with_mask(
    const BrokenSparseMomentumState& state, const ParamVector& grad,
    const Hyperparams& hp, std::span<const std::uint32_t> mask, std::uint32_t epoch) {
  return broken_step_impl(state, grad, hp, epoch, nullptr, mask);
}

namespace {

DgcStepResult dgc_step_impl(const VelocityState& state, const ParamVector& residual,
                            const ParamVector& grad, const Hyperparams& hp,
                            std::uint32_t epoch, const SparsifyConfig* cfg,
                            std::span<const std::uint32_t> mask) {
  VelocityState next = advance_velocity(state, grad, hp.momentum, hp.lr_at(epoch));
  ParamVector acc = residual;
  acc.add_scaled(next.u, 1.0);
  SplitResult split =
      cfg ? split_residual(acc, *cfg) : split_residual_with_mask(acc, mask);
  split.sent.timestamp = next.step;
  return {std::move(next), std::move(split.kept), std::move(split.sent)};
}

}  // namespace

DgcStepResult dgc_correction_step(const VelocityState& state, const ParamVector& residual,
                                  const ParamVector& grad, const Hyperparams& hp,
                                  const SparsifyConfig& cfg, std::uint32_t epoch) {
  return dgc_step_impl(state, residual, grad, hp, epoch, &cfg, {});
}

DgcStepResult dgc_correction_step_with_mask(const VelocityState& state,
                                            const ParamVector& residual,
                                            const ParamVector& grad,
                                            const Hyperparams& hp,
                                            std::span<const std::uint32_t> mask,
                                            std::uint32_t epoch) {
  return dgc_step_impl(state, residual, grad, hp, epoch, nullptr, mask);
}

namespace {

SamomentumResult samomentum_impl(const VelocityState& state, const ParamVector& grad,
                                 const Hyperparams& hp, std::uint32_t epoch,
                                 const SparsifyConfig* cfg,
                                 std::span<const std::uint32_t> mask) {
  if (!(hp.momentum > 0.0 && hp.momentum < 1.0))
    throw ConfigError("samomentum: momentum must be in (0, 1)");
  VelocityState tmp = advance_velocity(state, grad, hp.momentum, hp.lr_at(epoch));
  SplitResult split = cfg ? split_samomentum(tmp.u, *cfg, hp.momentum)
                          : split_samomentum_with_mask(tmp.u, mask, hp.momentum);
  split.sent.timestamp = tmp.step;
  return {VelocityState{std::move(split.kept), tmp.step}, std::move(split.sent)};
}

}  // namespace

SamomentumResult samomentum_step(const VelocityState& state, const ParamVector& grad,
                                 const Hyperparams& hp, const SparsifyConfig& cfg,
                                 std::uint32_t epoch) {
  return samomentum_impl(state, grad, hp, epoch, &cfg, {});
}

SamomentumResult samomentum_step_with_mask(const VelocityState& state,
                                           const ParamVector& grad, const Hyperparams& hp,
                                           std::span<const std::uint32_t> mask,
                                           std::uint32_t epoch) {
  return samomentum_impl(state, grad, hp, epoch, nullptr, mask);
}

}  // namespace dgs
