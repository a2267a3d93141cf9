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

#ifndef NODEWATT__PREPROCESS_HPP_
#define NODEWATT__PREPROCESS_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nodewatt/dataset.hpp"

namespace nodewatt::preprocess {

enum class GapPolicy {
  interpolate, // fill interior gaps linearly in time, drop boundary gaps
  drop,        // drop every row with a missing value
};

/// Removes rows with missing targets, fills or drops missing features, then
/// removes target outliers with |z| >= z_threshold (population sigma) until
/// none remain. A zero-variance target keeps every row.
Dataset clean(const Dataset &dataset, double z_threshold = 3.0,
              GapPolicy gap_policy = GapPolicy::interpolate);

/// Min/max of every feature and of the target.
Scaler fit_scaler(const Dataset &train);

/// Min-max maps features and target with `scaler`. Values outside the fitted
/// range land outside [0,1] and are kept.
Dataset apply_scaler(const Scaler &scaler, const Dataset &dataset);

/// Inverse of apply_scaler on the target column.
double invert_target(const Scaler &scaler, double normalized);

std::vector<std::string> default_feature_names();

/// Column projection in the given order.
Dataset select_features(const Dataset &dataset,
                        std::span<const std::string> names);

/// First floor(n * train_fraction) rows train, the rest validation.
std::pair<Dataset, Dataset> split_chronological(const Dataset &dataset,
                                                double train_fraction);

/// Flat [count x window_len x n_features] inputs; target i is the energy of
/// row window_len + i, input i covers rows [i, i + window_len).
struct WindowedSet {
  std::size_t window_len = 0;
  std::vector<std::string> feature_names;
  std::vector<double> inputs;
  std::vector<double> targets;
  std::vector<TimestampMs> target_timestamps;
  std::optional<Scaler> scaler; // carried over from the source dataset

  std::size_t size() const noexcept { return targets.size(); }
  std::size_t n_features() const noexcept { return feature_names.size(); }
  std::size_t window_stride() const noexcept {
    return window_len * n_features();
  }
  std::span<const double> window(std::size_t i) const {
    return {inputs.data() + i * window_stride(), window_stride()};
  }
  /// Most recent row of window i.
  std::span<const double> last_row(std::size_t i) const {
    return {inputs.data() + (i + 1) * window_stride() - n_features(),
            n_features()};
  }
};

WindowedSet make_windows(const Dataset &dataset, std::size_t window_len);

} // namespace nodewatt::preprocess

#endif // NODEWATT__PREPROCESS_HPP_
