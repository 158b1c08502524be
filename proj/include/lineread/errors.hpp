// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lineread {

/// Shape or dimension disagreement between tensors.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value (bad hyperparameter, malformed config file key).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A character outside the configured alphabet.
class VocabularyError : public std::runtime_error {
 public:
  explicit VocabularyError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (manifest lines, image files, checkpoints).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure: non-finite loss, fully masked softmax row, degenerate metric.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Broken internal contract (non-scalar backward, non-one-hot target column).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lineread
