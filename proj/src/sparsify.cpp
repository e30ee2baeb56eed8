// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/sparsify.hpp"

#include <algorithm>
#include <cmath>

namespace dgs {

namespace {

// Strict weak order: larger magnitude first, lower index on ties.
struct MagnitudeBefore {
  std::span<const double> values;
  bool operator()(std::uint32_t a, std::uint32_t b) const {
    double ma = std::abs(values[a]);
    double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  }
};

// Top-k by |value| among the given candidate indices, in place.
void take_topk(std::vector<std::uint32_t>& candidates, std::span<const double> values,
               std::uint32_t k) {
  if (candidates.size() > k) {
    std::nth_element(candidates.begin(), candidates.begin() + k, candidates.end(),
                     MagnitudeBefore{values});
    candidates.resize(k);
  }
  std::sort(candidates.begin(), candidates.end());
}

}  // namespace

SparsifyConfig::SparsifyConfig(double r) : drop_ratio(r) {
  if (!(r >= 0.0 && r < 100.0))
    throw ConfigError("sparsify: drop ratio must be in [0, 100)");
}

std::uint32_t keep_count(std::uint32_t n, double drop_ratio) {
  if (n == 0) return 0;
  if (drop_ratio == 0.0) return n;
  // ceil(n*(100-R)/100) == n - floor(n*R/100); the epsilon absorbs rounding
  // of the division when n*R/100 is an exact integer.
  double dropped = std::floor(static_cast<double>(n) * drop_ratio / 100.0 + 1e-9);
  if (dropped < 0.0) dropped = 0.0;
  if (dropped >= static_cast<double>(n)) dropped = static_cast<double>(n - 1);
  return n - static_cast<std::uint32_t>(dropped);
}

std::vector<std::uint32_t> select_topk(std::span<const double> values, double drop_ratio) {
  std::vector<std::uint32_t> nonzero;
  nonzero.reserve(values.size());
  for (std::uint32_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) nonzero.push_back(i);
  take_topk(nonzero, values, keep_count(static_cast<std::uint32_t>(values.size()), drop_ratio));
  return nonzero;
}

std::vector<std::uint32_t> select_topk_per_layer(const ParamVector& v,
                                                 const SparsifyConfig& cfg) {
  std::vector<std::uint32_t> mask;
  const LayerPartition& part = v.partition();
  for (std::uint32_t j = 0; j < part.layer_count(); ++j) {
    std::vector<std::uint32_t> local = select_topk(v.layer(j), cfg.drop_ratio);
    for (std::uint32_t i : local) mask.push_back(part.offset(j) + i);
  }
  return mask;
}

SparseUpdate sparsify_update(const SparseUpdate& g, const LayerPartition& partition,
                             const SparsifyConfig& cfg) {
  SparseUpdate out;
  out.worker_id = g.worker_id;
  out.timestamp = g.timestamp;
  out.dim = g.dim;

  std::size_t begin = 0;
  for (std::uint32_t j = 0; j < partition.layer_count(); ++j) {
    std::uint32_t layer_end = partition.offset(j) + partition.size(j);
    std::size_t end = begin;
    while (end < g.entries.size() && g.entries[end].index < layer_end) ++end;

    std::uint32_t k = keep_count(partition.size(j), cfg.drop_ratio);
    std::size_t nnz = end - begin;
    if (nnz <= k) {
      out.entries.insert(out.entries.end(), g.entries.begin() + begin,
                         g.entries.begin() + end);
    } else {
      std::vector<std::uint32_t> local(nnz);
      for (std::size_t i = 0; i < nnz; ++i) local[i] = static_cast<std::uint32_t>(i);
      std::vector<double> vals(nnz);
      for (std::size_t i = 0; i < nnz; ++i) vals[i] = g.entries[begin + i].value;
      take_topk(local, vals, k);
      for (std::uint32_t i : local) out.entries.push_back(g.entries[begin + i]);
    }
    begin = end;
  }
  return out;
}

SplitResult split_residual_with_mask(const ParamVector& v,
                                     std::span<const std::uint32_t> mask) {
  SplitResult r{SparseUpdate{}, v};
  r.sent.dim = v.size();
  std::span<double> kept = r.kept.mutable_values();
  for (std::uint32_t i : mask) {
    if (v[i] == 0.0) continue;
    r.sent.entries.push_back({i, v[i]});
    kept[i] = 0.0;
  }
  return r;
}

SplitResult split_residual(const ParamVector& v, const SparsifyConfig& cfg) {
  return split_residual_with_mask(v, select_topk_per_layer(v, cfg));
}

SplitResult split_samomentum_with_mask(const ParamVector& u,
                                       std::span<const std::uint32_t> mask,
                                       double momentum) {
  if (!(momentum > 0.0 && momentum < 1.0))
    throw ConfigError("samomentum: momentum must be in (0, 1)");
  SplitResult r{SparseUpdate{}, u};
  r.sent.dim = u.size();
  std::span<double> kept = r.kept.mutable_values();

  std::size_t next = 0;
  for (std::uint32_t i = 0; i < u.size(); ++i) {
    bool masked = next < mask.size() && mask[next] == i;
    if (masked) {
      ++next;
      if (u[i] != 0.0) r.sent.entries.push_back({i, u[i]});
      // sent components keep their full value in the velocity
    } else {
      kept[i] = u[i] / momentum;
    }
  }
  return r;
}

SplitResult split_samomentum(const ParamVector& u, const SparsifyConfig& cfg,
                             double momentum) {
  return split_samomentum_with_mask(u, select_topk_per_layer(u, cfg), momentum);
}

}  // namespace dgs
