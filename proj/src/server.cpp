// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/server.hpp"

namespace dgs {

ServerNode::ServerNode(LayerPartition partition, std::optional<SparsifyConfig> secondary)
    : partition_(partition), m_(std::move(partition)), secondary_(secondary) {}

void ServerNode::register_worker(std::uint32_t k) {
  if (v_.contains(k)) throw InvariantError("server: duplicate worker registration");
  v_.emplace(k, ParamVector(partition_));
  prev_.emplace(k, 0);
}

ServerNode::ExchangeResult ServerNode::on_gradient(std::uint32_t k, const SparseUpdate& g) {
  auto it = v_.find(k);
  if (it == v_.end()) throw InvariantError("server: unknown worker");
  if (g.dim != m_.size()) throw InvariantError("server: update dimension mismatch");
  g.validate();

  std::uint64_t staleness = t_ - prev_[k];
  apply_sparse(m_, g, -1.0);
  std::uint64_t now = t_ + 1;

  ParamVector& vk = it->second;
  SparseUpdate down = diff_as_sparse(m_, vk);
  down.worker_id = k;
  down.timestamp = now;

  if (secondary_) {
    // Re-sparsified delta: only the delivered components advance v_k. The
    // remainder M - v_k stays pending and keeps growing until selected.
    down = sparsify_update(down, partition_, *secondary_);
    apply_sparse(vk, down, 1.0);
  } else {
    // The full delta is delivered, so the accumulator lands exactly on M.
    vk = m_;
  }

  prev_[k] = now;
  t_ = now;
  return {std::move(down), staleness};
}

ParamVector ServerNode::global_model(const ParamVector& theta0) const {
  ParamVector out = theta0;
  out.add_scaled(m_, 1.0);
  return out;
}

const ParamVector& ServerNode::sent_accumulator(std::uint32_t k) const {
  auto it = v_.find(k);
  if (it == v_.end()) throw InvariantError("server: unknown worker");
  return it->second;
}

std::uint64_t ServerNode::prev(std::uint32_t k) const {
  auto it = prev_.find(k);
  if (it == prev_.end()) throw InvariantError("server: unknown worker");
  return it->second;
}

ServerSnapshot ServerNode::snapshot() const {
  ServerSnapshot s;
  s.t = t_;
  s.prev = prev_;
  for (const auto& [k, vk] : v_) {
    ParamVector pending = m_;
    pending.add_scaled(vk, -1.0);
    s.residual_l2[k] = l2_norm(pending);
  }
  return s;
}

}  // namespace dgs
