// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "dgs/sparsify.hpp"
#include "dgs/tensor.hpp"

namespace dgs {

struct ServerSnapshot {
  std::uint64_t t = 0;
  std::map<std::uint32_t, std::uint64_t> prev;
  std::map<std::uint32_t, double> residual_l2;  // ||M - v_k|| per worker
};

// Server side of the difference-tracking exchange. Instead of the model it
// keeps M, the accumulated update since the initial parameters, plus one
// sent-accumulator v_k per worker recording everything already delivered to
// that worker. One upward message is processed at a time; the timestamp t
// counts processed messages.
class ServerNode {
 public:
  ServerNode(LayerPartition partition, std::optional<SparsifyConfig> secondary = {});

  void register_worker(std::uint32_t k);

  struct ExchangeResult {
    SparseUpdate down;       // delta bringing worker k up to the current model
    std::uint64_t staleness; // t at receive minus the worker's previous exchange
  };

  // Applies the worker's update to M, computes the downward delta
  // G = M - v_k (optionally re-sparsified), folds G into v_k and advances
  // the clock.
  ExchangeResult on_gradient(std::uint32_t k, const SparseUpdate& g);

  // theta_0 + M.
  ParamVector global_model(const ParamVector& theta0) const;

  const ParamVector& model_difference() const { return m_; }
  const ParamVector& sent_accumulator(std::uint32_t k) const;
  std::uint64_t timestamp() const { return t_; }
  std::uint64_t prev(std::uint32_t k) const;
  bool secondary_enabled() const { return secondary_.has_value(); }

  ServerSnapshot snapshot() const;

 private:
  LayerPartition partition_;
  ParamVector m_;
  std::map<std::uint32_t, ParamVector> v_;
  std::map<std::uint32_t, std::uint64_t> prev_;
  std::uint64_t t_ = 0;
  std::optional<SparsifyConfig> secondary_;
};

}  // namespace dgs
