// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dgs {

// Invalid configuration: bad hyperparameter, malformed experiment config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A domain-type invariant was violated (unsorted sparse indices, shape
// mismatch, duplicate registration, ...).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An arithmetic result left the finite range.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite gradient or model; carries the step at
// which the run diverged.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(std::uint64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

// Wire-format decode failure. Each failure class gets its own kind so
// callers can distinguish a truncated buffer from corrupt payload.
class DecodeError : public std::runtime_error {
 public:
  enum class Kind {
    bad_magic,
    truncated,          // buffer shorter than the fixed header
    malformed_length,   // payload is not a whole number of records
    index_out_of_bounds,
    non_increasing_index,
    non_finite_value,
    zero_value,
  };

  DecodeError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace dgs
