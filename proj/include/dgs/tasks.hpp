// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dgs/rng.hpp"
#include "dgs/tensor.hpp"

namespace dgs {

// Seeded synthetic samples with a disjoint train/test split. Features are
// stored row-major.
struct SyntheticDataset {
  std::uint32_t feature_dim = 0;
  std::vector<double> features;
  std::vector<std::int32_t> labels;
  std::vector<std::uint32_t> train_indices;
  std::vector<std::uint32_t> test_indices;
  std::uint64_t seed = 0;

  std::uint32_t sample_count() const {
    return feature_dim == 0 ? 0 : static_cast<std::uint32_t>(features.size() / feature_dim);
  }
  std::span<const double> sample(std::uint32_t i) const {
    return std::span<const double>(features).subspan(
        static_cast<std::size_t>(i) * feature_dim, feature_dim);
  }
};

// Two Gaussian blobs at +-separation/2 along a fixed unit direction,
// alternating labels so any prefix is class-balanced. 80/20 split.
// scale_decay < 1 shrinks feature f by scale_decay^f (mean and noise alike,
// so the Bayes boundary is unchanged but the fit becomes ill-conditioned).
SyntheticDataset make_blobs_dataset(std::uint32_t n_features, std::uint32_t n_samples,
                                    double separation, std::uint64_t seed,
                                    double scale_decay = 1.0);

// The four corner points of the xor problem (labels 1 when signs agree).
SyntheticDataset make_xor_dataset();

// CSV inspection format: header `label,split,f0,...`, one row per sample,
// split is "train" or "test". Round-trips bit-exactly.
std::string dataset_to_csv(const SyntheticDataset& ds);
SyntheticDataset dataset_from_csv(const std::string& text);

// A differentiable training task: loss and analytic gradient over a batch
// of dataset sample indices. Tasks are immutable; loss/grad are pure.
class Task {
 public:
  virtual ~Task() = default;
  virtual const LayerPartition& partition() const = 0;
  virtual const SyntheticDataset& dataset() const = 0;
  virtual double loss(const ParamVector& theta, std::span<const std::uint32_t> batch) const = 0;
  virtual ParamVector grad(const ParamVector& theta, std::span<const std::uint32_t> batch) const = 0;
  virtual bool is_classifier() const { return false; }
  // Fraction of the given samples classified correctly; NaN for
  // non-classification tasks.
  virtual double accuracy(const ParamVector& theta, std::span<const std::uint32_t> batch) const;
  virtual ParamVector initial_params(Rng& rng) const = 0;
};

// loss = 0.5*||theta - optimum||^2, grad = theta - optimum. Single layer.
std::shared_ptr<const Task> make_quadratic_bowl(std::uint32_t dim, std::vector<double> optimum);

// Binary logistic regression on two Gaussian blobs; layers [weights, bias].
std::shared_ptr<const Task> make_logistic_task(std::uint32_t n_features,
                                               std::uint32_t n_samples,
                                               double separation, std::uint64_t seed,
                                               double scale_decay = 1.0);

enum class Activation { tanh, relu };

// Fully-connected net with sigmoid output and cross-entropy loss; layer
// sizes include input and the final single logit, e.g. {2, 4, 1}. Layers in
// the partition alternate weights and biases.
std::shared_ptr<const Task> make_mlp_task(std::vector<std::uint32_t> layer_sizes,
                                          Activation activation, SyntheticDataset dataset);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double gradcheck(const Task& task, const ParamVector& theta,
                 std::span<const std::uint32_t> batch, double step);

}  // namespace dgs
