// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dgs/errors.hpp"

namespace dgs {

// Contiguous partition of a flat parameter vector into layers.
// offsets are strictly increasing, start at 0, and offset[j] + size[j] ==
// offset[j+1]; the sizes sum to the total parameter count.
class LayerPartition {
 public:
  LayerPartition() = default;
  explicit LayerPartition(std::vector<std::uint32_t> sizes);

  static LayerPartition single(std::uint32_t size);

  std::uint32_t layer_count() const { return static_cast<std::uint32_t>(sizes_.size()); }
  std::uint32_t total_size() const { return total_; }
  std::uint32_t offset(std::uint32_t layer) const { return offsets_[layer]; }
  std::uint32_t size(std::uint32_t layer) const { return sizes_[layer]; }
  std::uint32_t layer_of(std::uint32_t index) const;

  const std::vector<std::uint32_t>& offsets() const { return offsets_; }
  const std::vector<std::uint32_t>& sizes() const { return sizes_; }

  bool operator==(const LayerPartition&) const = default;

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> sizes_;
  std::uint32_t total_ = 0;
};

// Dense 64-bit vector over a fixed layer partition. Length is immutable
// after construction; mutation happens through the named operations below,
// which keep every component finite.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(LayerPartition partition);  // zero-filled
  ParamVector(LayerPartition partition, std::vector<double> values);

  std::uint32_t size() const { return static_cast<std::uint32_t>(values_.size()); }
  const LayerPartition& partition() const { return partition_; }

  double operator[](std::uint32_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  std::span<const double> layer(std::uint32_t j) const {
    return std::span<const double>(values_).subspan(partition_.offset(j), partition_.size(j));
  }

  void fill(double v);
  void scale(double s);
  // this += s * other; partitions must match.
  void add_scaled(const ParamVector& other, double s);

  bool operator==(const ParamVector&) const = default;

 private:
  LayerPartition partition_;
  std::vector<double> values_;
};

struct SparseEntry {
  std::uint32_t index;
  double value;
  bool operator==(const SparseEntry&) const = default;
};

// Coordinate-format delta over a flat parameter vector. Indices are
// positions in the full flattened vector, strictly increasing; values are
// finite and nonzero. `dim` is the length of the vector the update applies
// to (not carried on the wire).
struct SparseUpdate {
  std::uint32_t worker_id = 0;
  std::uint64_t timestamp = 0;
  std::uint32_t dim = 0;
  std::vector<SparseEntry> entries;

  std::size_t nnz() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  void validate() const;  // throws InvariantError on any broken invariant
  bool operator==(const SparseUpdate&) const = default;
};

// Wire format, little-endian:
//
//   magic "DGS1"   4 bytes
//   worker_id      u32
//   timestamp      u64
//   entries        nnz x (index u32, value f64)
//
// The entry count is implied by the buffer length; an encoded update is
// exactly 16 + 12*nnz bytes.
inline constexpr std::size_t kWireHeaderBytes = 16;
inline constexpr std::size_t kWireEntryBytes = 12;
inline constexpr std::size_t encoded_size(std::size_t nnz) {
  return kWireHeaderBytes + kWireEntryBytes * nnz;
}

std::vector<std::uint8_t> encode(const SparseUpdate& update);
SparseUpdate decode(std::span<const std::uint8_t> bytes, std::uint32_t dim);

// dest[i] += scale * value for every entry; other components untouched.
void apply_sparse(ParamVector& dest, const SparseUpdate& delta, double scale);

// Entries exactly where a[i] - b[i] != 0. Partitions must match.
SparseUpdate diff_as_sparse(const ParamVector& a, const ParamVector& b);

// Dense vector with the update's values and zeros elsewhere.
ParamVector densify(const SparseUpdate& update, const LayerPartition& partition);

// All nonzero components of a dense vector as a sparse update.
SparseUpdate to_sparse(const ParamVector& v, std::uint32_t worker_id = 0,
                       std::uint64_t timestamp = 0);

double max_abs_diff(const ParamVector& a, const ParamVector& b);
double l2_norm(const ParamVector& v);

}  // namespace dgs
