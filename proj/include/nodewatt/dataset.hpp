// Copyright 2026 The nodewatt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NODEWATT__DATASET_HPP_
#define NODEWATT__DATASET_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodewatt/core.hpp"

namespace nodewatt {

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  /// (x - min) / (max - min); 0 when the range is degenerate. Not clamped.
  double scale(double x) const noexcept {
    return max > min ? (x - min) / (max - min) : 0.0;
  }
  double invert(double x) const noexcept {
    return max > min ? x * (max - min) + min : min;
  }

  friend bool operator==(const MinMax &, const MinMax &) = default;
};

/// Per-feature and target min-max pairs fitted on training data.
struct Scaler {
  std::vector<std::string> feature_names;
  std::vector<MinMax> features;
  MinMax target;

  friend bool operator==(const Scaler &, const Scaler &) = default;
};

/// Training and validation MSE after one epoch (LSTM) or one tree (GBT).
struct LossPoint {
  double train_mse = 0.0;
  double val_mse = 0.0; // NaN without validation data
};

/// Chronologically ordered table of feature rows and energy targets for one
/// node. Missing values are NaN until cleaned.
struct Dataset {
  NodeRole node = NodeRole::master();
  std::vector<std::string> feature_names;
  std::vector<TimestampMs> timestamps_ms;
  std::vector<double> features; // row-major, size() x n_features()
  std::vector<double> targets_kwh;
  std::optional<Scaler> scaler; // set once apply_scaler has run

  std::size_t size() const noexcept { return timestamps_ms.size(); }
  bool empty() const noexcept { return timestamps_ms.empty(); }
  std::size_t n_features() const noexcept { return feature_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features(), n_features()};
  }
  std::span<double> row(std::size_t i) {
    return {features.data() + i * n_features(), n_features()};
  }

  void push_back(TimestampMs ts, std::span<const double> values,
                 double target_kwh);

  /// Same node and feature names, rows [first, last).
  Dataset slice(std::size_t first, std::size_t last) const;

  /// Full six-column table from validated samples.
  static Dataset from_samples(NodeRole node, std::span<const Sample> samples);

  /// Back to validated samples; requires the six canonical columns and no
  /// missing values.
  std::vector<Sample> to_samples() const;

  friend bool operator==(const Dataset &, const Dataset &) = default;
};

} // namespace nodewatt

#endif // NODEWATT__DATASET_HPP_
