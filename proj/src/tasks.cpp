// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dgs {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Cross-entropy of a logit against a 0/1 label, stable for large |z|:
// -[y log p + (1-y) log(1-p)] = max(z,0) - z*y + log1p(exp(-|z|)).
double bce_from_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double Task::accuracy(const ParamVector&, std::span<const std::uint32_t>) const {
  return std::numeric_limits<double>::quiet_NaN();
}

SyntheticDataset make_blobs_dataset(std::uint32_t n_features, std::uint32_t n_samples,
                                    double separation, std::uint64_t seed,
                                    double scale_decay) {
  if (!(scale_decay > 0.0 && scale_decay <= 1.0))
    throw ConfigError("blobs: scale_decay must be in (0, 1]");
  SyntheticDataset ds;
  ds.feature_dim = n_features;
  ds.seed = seed;
  ds.features.reserve(static_cast<std::size_t>(n_features) * n_samples);
  ds.labels.reserve(n_samples);

  Rng rng(seed, 0);
  // Fixed unit direction along which the two class means are separated.
  std::vector<double> direction(n_features);
  double norm = 0.0;
  for (double& d : direction) {
    d = rng.normal();
    norm += d * d;
  }
  norm = std::sqrt(norm);
  for (double& d : direction) d /= norm;

  std::vector<double> scale(n_features, 1.0);
  for (std::uint32_t f = 1; f < n_features; ++f) scale[f] = scale[f - 1] * scale_decay;

  for (std::uint32_t i = 0; i < n_samples; ++i) {
    std::int32_t label = static_cast<std::int32_t>(i % 2);
    double sign = label == 1 ? 0.5 : -0.5;
    for (std::uint32_t f = 0; f < n_features; ++f)
      ds.features.push_back(scale[f] * (sign * separation * direction[f] + rng.normal()));
    ds.labels.push_back(label);
  }

  std::uint32_t n_train = n_samples - n_samples / 5;
  for (std::uint32_t i = 0; i < n_samples; ++i)
    (i < n_train ? ds.train_indices : ds.test_indices).push_back(i);
  return ds;
}

SyntheticDataset make_xor_dataset() {
  SyntheticDataset ds;
  ds.feature_dim = 2;
  ds.features = {1, 1, 1, -1, -1, 1, -1, -1};
  ds.labels = {1, 0, 0, 1};
  ds.train_indices = {0, 1, 2, 3};
  // four samples only; evaluation falls back to the training set
  return ds;
}

std::string dataset_to_csv(const SyntheticDataset& ds) {
  std::ostringstream out;
  out << "label,split";
  for (std::uint32_t f = 0; f < ds.feature_dim; ++f) out << ",f" << f;
  out << "\n";
  std::vector<bool> is_test(ds.sample_count(), false);
  for (std::uint32_t i : ds.test_indices) is_test[i] = true;
  char buf[32];
  for (std::uint32_t i = 0; i < ds.sample_count(); ++i) {
    out << ds.labels[i] << ',' << (is_test[i] ? "test" : "train");
    for (double v : ds.sample(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  return out.str();
}

SyntheticDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset: empty CSV");
  std::size_t columns = 1 + std::count(line.begin(), line.end(), ',');
  if (columns < 3) throw ConfigError("dataset: header needs label, split and features");

  SyntheticDataset ds;
  ds.feature_dim = static_cast<std::uint32_t>(columns - 2);
  std::uint32_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    ds.labels.push_back(static_cast<std::int32_t>(std::strtol(cell.c_str(), nullptr, 10)));
    std::getline(cells, cell, ',');
    if (cell == "test") ds.test_indices.push_back(row);
    else if (cell == "train") ds.train_indices.push_back(row);
    else throw ConfigError("dataset: split must be train or test");
    std::size_t got = 0;
    while (std::getline(cells, cell, ',')) {
      ds.features.push_back(std::strtod(cell.c_str(), nullptr));
      ++got;
    }
    if (got != ds.feature_dim) throw ConfigError("dataset: row width mismatch");
    ++row;
  }
  return ds;
}

namespace {

class QuadraticBowlTask final : public Task {
 public:
  QuadraticBowlTask(std::uint32_t dim, std::vector<double> optimum)
      : partition_(LayerPartition::single(dim)),
        optimum_(partition_, std::move(optimum)) {
    // A single dummy sample; the loss is independent of the batch.
    dataset_.feature_dim = 1;
    dataset_.features = {0.0};
    dataset_.labels = {0};
    dataset_.train_indices = {0};
  }

  const LayerPartition& partition() const override { return partition_; }
  const SyntheticDataset& dataset() const override { return dataset_; }

  double loss(const ParamVector& theta, std::span<const std::uint32_t>) const override {
    double s = 0.0;
    for (std::uint32_t i = 0; i < theta.size(); ++i) {
      double d = theta[i] - optimum_[i];
      s += d * d;
    }
    return 0.5 * s;
  }

  ParamVector grad(const ParamVector& theta, std::span<const std::uint32_t>) const override {
    ParamVector g = theta;
    g.add_scaled(optimum_, -1.0);
    return g;
  }

  ParamVector initial_params(Rng&) const override { return ParamVector(partition_); }

 private:
  LayerPartition partition_;
  ParamVector optimum_;
  SyntheticDataset dataset_;
};

class LogisticTask final : public Task {
 public:
  LogisticTask(std::uint32_t n_features, SyntheticDataset dataset)
      : partition_(std::vector<std::uint32_t>{n_features, 1}),
        n_features_(n_features),
        dataset_(std::move(dataset)) {}

  const LayerPartition& partition() const override { return partition_; }
  const SyntheticDataset& dataset() const override { return dataset_; }
  bool is_classifier() const override { return true; }

  double loss(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    double total = 0.0;
    for (std::uint32_t s : batch)
      total += bce_from_logit(logit(theta, s), dataset_.labels[s]);
    return total / static_cast<double>(batch.size());
  }

  ParamVector grad(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    ParamVector g(partition_);
    std::span<double> gv = g.mutable_values();
    double inv = 1.0 / static_cast<double>(batch.size());
    for (std::uint32_t s : batch) {
      double err = (sigmoid(logit(theta, s)) - dataset_.labels[s]) * inv;
      std::span<const double> x = dataset_.sample(s);
      for (std::uint32_t f = 0; f < n_features_; ++f) gv[f] += err * x[f];
      gv[n_features_] += err;
    }
    return g;
  }

  double accuracy(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    std::uint32_t correct = 0;
    for (std::uint32_t s : batch) {
      std::int32_t pred = logit(theta, s) >= 0.0 ? 1 : 0;
      if (pred == dataset_.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(batch.size());
  }

  ParamVector initial_params(Rng&) const override { return ParamVector(partition_); }

 private:
  double logit(const ParamVector& theta, std::uint32_t s) const {
    std::span<const double> x = dataset_.sample(s);
    double z = theta[n_features_];
    for (std::uint32_t f = 0; f < n_features_; ++f) z += theta[f] * x[f];
    return z;
  }

  LayerPartition partition_;
  std::uint32_t n_features_;
  SyntheticDataset dataset_;
};

class MlpTask final : public Task {
 public:
  MlpTask(std::vector<std::uint32_t> layer_sizes, Activation act, SyntheticDataset dataset)
      : layer_sizes_(std::move(layer_sizes)), act_(act), dataset_(std::move(dataset)) {
    if (layer_sizes_.size() < 3)
      throw ConfigError("mlp: need at least one hidden layer");
    if (layer_sizes_.back() != 1)
      throw ConfigError("mlp: final layer must produce a single logit");
    if (layer_sizes_.front() != dataset_.feature_dim)
      throw ConfigError("mlp: input width does not match dataset features");
    std::vector<std::uint32_t> chunks;
    for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
      chunks.push_back(layer_sizes_[l] * layer_sizes_[l + 1]);  // weights, row-major out x in
      chunks.push_back(layer_sizes_[l + 1]);                    // biases
    }
    partition_ = LayerPartition(std::move(chunks));
  }

  const LayerPartition& partition() const override { return partition_; }
  const SyntheticDataset& dataset() const override { return dataset_; }
  bool is_classifier() const override { return true; }

  double loss(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    double total = 0.0;
    Scratch sc(layer_sizes_);
    for (std::uint32_t s : batch)
      total += bce_from_logit(forward(theta, s, sc), dataset_.labels[s]);
    return total / static_cast<double>(batch.size());
  }

  ParamVector grad(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    ParamVector g(partition_);
    std::span<double> gv = g.mutable_values();
    Scratch sc(layer_sizes_);
    double inv = 1.0 / static_cast<double>(batch.size());

    for (std::uint32_t s : batch) {
      double z = forward(theta, s, sc);
      // With a sigmoid output and cross-entropy loss, dL/dlogit = p - y.
      std::vector<double> delta{(sigmoid(z) - dataset_.labels[s]) * inv};
      for (std::size_t l = layer_count(); l-- > 0;) {
        std::uint32_t in = layer_sizes_[l];
        std::uint32_t out = layer_sizes_[l + 1];
        std::span<const double> a_prev = sc.activation(l);
        const double* w = theta.values().data() + partition_.offset(w_chunk(l));
        double* gw = gv.data() + partition_.offset(w_chunk(l));
        double* gb = gv.data() + partition_.offset(b_chunk(l));
        std::vector<double> delta_prev(in, 0.0);
        for (std::uint32_t o = 0; o < out; ++o) {
          gb[o] += delta[o];
          for (std::uint32_t i = 0; i < in; ++i) {
            gw[o * in + i] += delta[o] * a_prev[i];
            delta_prev[i] += delta[o] * w[o * in + i];
          }
        }
        if (l > 0) {
          std::span<const double> z_prev = sc.preactivation(l - 1);
          for (std::uint32_t i = 0; i < in; ++i)
            delta_prev[i] *= act_derivative(z_prev[i], a_prev[i]);
        }
        delta = std::move(delta_prev);
      }
    }
    return g;
  }

  double accuracy(const ParamVector& theta, std::span<const std::uint32_t> batch) const override {
    Scratch sc(layer_sizes_);
    std::uint32_t correct = 0;
    for (std::uint32_t s : batch) {
      std::int32_t pred = forward(theta, s, sc) >= 0.0 ? 1 : 0;
      if (pred == dataset_.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(batch.size());
  }

  ParamVector initial_params(Rng& rng) const override {
    std::vector<double> v(partition_.total_size());
    for (std::size_t l = 0; l < layer_count(); ++l) {
      double scale = 1.0 / std::sqrt(static_cast<double>(layer_sizes_[l]));
      std::uint32_t w0 = partition_.offset(w_chunk(l));
      for (std::uint32_t i = 0; i < partition_.size(w_chunk(l)); ++i)
        v[w0 + i] = rng.uniform(-scale, scale);
      // biases start at zero
    }
    return ParamVector(partition_, std::move(v));
  }

 private:
  std::size_t layer_count() const { return layer_sizes_.size() - 1; }
  std::uint32_t w_chunk(std::size_t l) const { return static_cast<std::uint32_t>(2 * l); }
  std::uint32_t b_chunk(std::size_t l) const { return static_cast<std::uint32_t>(2 * l + 1); }

  // Per-sample forward pass storage: activations per layer (input included)
  // and pre-activations per hidden layer.
  struct Scratch {
    explicit Scratch(const std::vector<std::uint32_t>& sizes) {
      for (std::size_t l = 0; l < sizes.size(); ++l) acts.emplace_back(sizes[l], 0.0);
      for (std::size_t l = 1; l + 1 < sizes.size(); ++l) zs.emplace_back(sizes[l], 0.0);
    }
    std::span<const double> activation(std::size_t l) const { return acts[l]; }
    std::span<const double> preactivation(std::size_t hidden) const { return zs[hidden]; }
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> zs;
  };

  double act_apply(double z) const {
    return act_ == Activation::tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
  }
  double act_derivative(double z, double a) const {
    return act_ == Activation::tanh ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
  }

  double forward(const ParamVector& theta, std::uint32_t s, Scratch& sc) const {
    std::span<const double> x = dataset_.sample(s);
    std::copy(x.begin(), x.end(), sc.acts[0].begin());
    double logit = 0.0;
    for (std::size_t l = 0; l < layer_count(); ++l) {
      std::uint32_t in = layer_sizes_[l];
      std::uint32_t out = layer_sizes_[l + 1];
      const double* w = theta.values().data() + partition_.offset(w_chunk(l));
      const double* b = theta.values().data() + partition_.offset(b_chunk(l));
      for (std::uint32_t o = 0; o < out; ++o) {
        double z = b[o];
        for (std::uint32_t i = 0; i < in; ++i) z += w[o * in + i] * sc.acts[l][i];
        if (l + 1 == layer_count()) {
          logit = z;
        } else {
          sc.zs[l][o] = z;
          sc.acts[l + 1][o] = act_apply(z);
        }
      }
    }
    return logit;
  }

  std::vector<std::uint32_t> layer_sizes_;
  Activation act_;
  SyntheticDataset dataset_;
  LayerPartition partition_;
};

}  // namespace

std::shared_ptr<const Task> make_quadratic_bowl(std::uint32_t dim, std::vector<double> optimum) {
  if (dim == 0) throw ConfigError("quadratic: dim must be >= 1");
  if (optimum.size() != dim) throw ConfigError("quadratic: optimum size must equal dim");
  return std::make_shared<QuadraticBowlTask>(dim, std::move(optimum));
}

std::shared_ptr<const Task> make_logistic_task(std::uint32_t n_features,
                                               std::uint32_t n_samples,
                                               double separation, std::uint64_t seed,
                                               double scale_decay) {
  if (n_features == 0 || n_samples < 5)
    throw ConfigError("logistic: need n_features >= 1 and n_samples >= 5");
  if (!(separation > 0.0)) throw ConfigError("logistic: separation must be > 0");
  return std::make_shared<LogisticTask>(
      n_features, make_blobs_dataset(n_features, n_samples, separation, seed, scale_decay));
}

std::shared_ptr<const Task> make_mlp_task(std::vector<std::uint32_t> layer_sizes,
                                          Activation activation, SyntheticDataset dataset) {
  return std::make_shared<MlpTask>(std::move(layer_sizes), activation, std::move(dataset));
}

double gradcheck(const Task& task, const ParamVector& theta,
                 std::span<const std::uint32_t> batch, double step) {
  if (!(step > 0.0)) throw ConfigError("gradcheck: step must be > 0");
  ParamVector analytic = task.grad(theta, batch);
  ParamVector probe = theta;
  std::span<double> pv = probe.mutable_values();
  double worst = 0.0;
  for (std::uint32_t i = 0; i < theta.size(); ++i) {
    double saved = pv[i];
    pv[i] = saved + step;
    double up = task.loss(probe, batch);
    pv[i] = saved - step;
    double down = task.loss(probe, batch);
    pv[i] = saved;
    double fd = (up - down) / (2.0 * step);
    double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace dgs
