// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dgs/tensor.hpp"

namespace dgs {

// Magnitude-based per-layer selection: of each layer's n components the
// largest ceil(n*(100-R)/100) by |value| are kept, the rest dropped.
struct SparsifyConfig {
  double drop_ratio = 0.0;  // R, percent of entries dropped, in [0, 100)

  SparsifyConfig() = default;
  explicit SparsifyConfig(double r);
};

// Number of entries kept of an n-element layer at drop ratio R.
std::uint32_t keep_count(std::uint32_t n, double drop_ratio);

// Local indices of the top-k |values| within one layer segment, exact zeros
// excluded, ties broken toward the lower index. Sorted ascending.
std::vector<std::uint32_t> select_topk(std::span<const double> values, double drop_ratio);

// Per-layer top-k over a whole vector; global indices, sorted ascending.
std::vector<std::uint32_t> select_topk_per_layer(const ParamVector& v,
                                                 const SparsifyConfig& cfg);

// Per-layer top-k over the entries of a sparse update. k is computed from
// the full layer size, so absent (zero) components never count as kept.
SparseUpdate sparsify_update(const SparseUpdate& g, const LayerPartition& partition,
                             const SparsifyConfig& cfg);

struct SplitResult {
  SparseUpdate sent;  // masked components
  ParamVector kept;   // what stays behind
};

// Residual split: sent carries the masked entries, kept zeroes them and
// retains everything else; densify(sent) + kept == v exactly.
SplitResult split_residual(const ParamVector& v, const SparsifyConfig& cfg);
SplitResult split_residual_with_mask(const ParamVector& v,
                                     std::span<const std::uint32_t> mask);

// Velocity split: masked components are sent and keep their value in the
// velocity; unmasked components are rescaled by 1/m so the next momentum
// multiplication restores them and a later send carries the full
// accumulated sum. Requires 0 < m < 1.
SplitResult split_samomentum(const ParamVector& u, const SparsifyConfig& cfg,
                             double momentum);
SplitResult split_samomentum_with_mask(const ParamVector& u,
                                       std::span<const std::uint32_t> mask,
                                       double momentum);

}  // namespace dgs
