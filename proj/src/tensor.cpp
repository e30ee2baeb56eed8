// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#include "dgs/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace dgs {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'G', 'S', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 |
         static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

}  // namespace

LayerPartition::LayerPartition(std::vector<std::uint32_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw InvariantError("partition: no layers");
  offsets_.reserve(sizes_.size());
  std::uint64_t off = 0;
  for (std::uint32_t s : sizes_) {
    if (s == 0) throw InvariantError("partition: empty layer");
    offsets_.push_back(static_cast<std::uint32_t>(off));
    off += s;
    if (off > std::numeric_limits<std::uint32_t>::max())
      throw InvariantError("partition: total size exceeds 32-bit index range");
  }
  total_ = static_cast<std::uint32_t>(off);
}

LayerPartition LayerPartition::single(std::uint32_t size) {
  return LayerPartition(std::vector<std::uint32_t>{size});
}

std::uint32_t LayerPartition::layer_of(std::uint32_t index) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  return static_cast<std::uint32_t>(it - offsets_.begin()) - 1;
}

ParamVector::ParamVector(LayerPartition partition)
    : partition_(std::move(partition)), values_(partition_.total_size(), 0.0) {}

ParamVector::ParamVector(LayerPartition partition, std::vector<double> values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  if (values_.size() != partition_.total_size())
    throw InvariantError("param vector: length does not match partition");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvariantError("param vector: non-finite component");
}

void ParamVector::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void ParamVector::scale(double s) {
  for (double& v : values_) {
    v *= s;
    if (!std::isfinite(v)) throw NumericError("param vector: scale overflowed");
  }
}

void ParamVector::add_scaled(const ParamVector& other, double s) {
  if (!(partition_ == other.partition_))
    throw InvariantError("param vector: partition mismatch in add_scaled");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += s * other.values_[i];
    if (!std::isfinite(values_[i]))
      throw NumericError("param vector: add_scaled overflowed");
  }
}

void SparseUpdate::validate() const {
  std::int64_t last = -1;
  for (const SparseEntry& e : entries) {
    if (static_cast<std::int64_t>(e.index) <= last)
      throw InvariantError("sparse update: indices not strictly increasing");
    if (e.index >= dim) throw InvariantError("sparse update: index out of bounds");
    if (!std::isfinite(e.value)) throw InvariantError("sparse update: non-finite value");
    if (e.value == 0.0) throw InvariantError("sparse update: zero value");
    last = e.index;
  }
}

std::vector<std::uint8_t> encode(const SparseUpdate& update) {
  update.validate();
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(update.nnz()));
  for (std::uint8_t m : kMagic) out.push_back(m);
  put_u32(out, update.worker_id);
  put_u64(out, update.timestamp);
  for (const SparseEntry& e : update.entries) {
    put_u32(out, e.index);
    put_u64(out, std::bit_cast<std::uint64_t>(e.value));
  }
  return out;
}

SparseUpdate decode(std::span<const std::uint8_t> bytes, std::uint32_t dim) {
  if (bytes.size() < kWireHeaderBytes)
    throw DecodeError(DecodeError::Kind::truncated, "decode: buffer shorter than header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw DecodeError(DecodeError::Kind::bad_magic, "decode: bad magic");
  std::size_t payload = bytes.size() - kWireHeaderBytes;
  if (payload % kWireEntryBytes != 0)
    throw DecodeError(DecodeError::Kind::malformed_length,
                      "decode: payload is not a whole number of records");

  SparseUpdate u;
  u.worker_id = get_u32(bytes, 4);
  u.timestamp = get_u64(bytes, 8);
  u.dim = dim;
  std::size_t n = payload / kWireEntryBytes;
  u.entries.reserve(n);
  std::int64_t last = -1;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t at = kWireHeaderBytes + i * kWireEntryBytes;
    std::uint32_t index = get_u32(bytes, at);
    double value = std::bit_cast<double>(get_u64(bytes, at + 4));
    if (index >= dim)
      throw DecodeError(DecodeError::Kind::index_out_of_bounds, "decode: index out of bounds");
    if (static_cast<std::int64_t>(index) <= last)
      throw DecodeError(DecodeError::Kind::non_increasing_index,
                        "decode: indices not strictly increasing");
    if (!std::isfinite(value))
      throw DecodeError(DecodeError::Kind::non_finite_value, "decode: non-finite value");
    if (value == 0.0)
      throw DecodeError(DecodeError::Kind::zero_value, "decode: zero value");
    u.entries.push_back({index, value});
    last = index;
  }
  return u;
}

void apply_sparse(ParamVector& dest, const SparseUpdate& delta, double scale) {
  if (delta.dim != dest.size())
    throw InvariantError("apply_sparse: update dimension does not match vector");
  std::span<double> v = dest.mutable_values();
  for (const SparseEntry& e : delta.entries) {
    v[e.index] += scale * e.value;
    if (!std::isfinite(v[e.index]))
      throw NumericError("apply_sparse: component overflowed");
  }
}

SparseUpdate diff_as_sparse(const ParamVector& a, const ParamVector& b) {
  if (!(a.partition() == b.partition()))
    throw InvariantError("diff_as_sparse: partition mismatch");
  SparseUpdate u;
  u.dim = a.size();
  for (std::uint32_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) u.entries.push_back({i, d});
  }
  return u;
}

ParamVector densify(const SparseUpdate& update, const LayerPartition& partition) {
  if (update.dim != partition.total_size())
    throw InvariantError("densify: update dimension does not match partition");
  ParamVector out(partition);
  std::span<double> v = out.mutable_values();
  for (const SparseEntry& e : update.entries) v[e.index] = e.value;
  return out;
}

SparseUpdate to_sparse(const ParamVector& v, std::uint32_t worker_id, std::uint64_t timestamp) {
  SparseUpdate u;
  u.worker_id = worker_id;
  u.timestamp = timestamp;
  u.dim = v.size();
  for (std::uint32_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) u.entries.push_back({i, v[i]});
  return u;
}

double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  double m = 0.0;
  for (std::uint32_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_norm(const ParamVector& v) {
  double s = 0.0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

}  // namespace dgs
