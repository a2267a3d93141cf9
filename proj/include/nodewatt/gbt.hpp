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

#ifndef NODEWATT__GBT_HPP_
#define NODEWATT__GBT_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nodewatt/dataset.hpp"
#include "nodewatt/exec.hpp"
#include "nodewatt/preprocess.hpp"

namespace nodewatt::gbt {

/// Row-major [rows x cols] view.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return data.subspan(r * cols, cols);
  }
};

struct TreeNode {
  static constexpr int kLeaf = -1;

  int feature = kLeaf; // split feature, or kLeaf
  double threshold = 0.0;
  int left = -1;  // x[feature] <= threshold
  int right = -1; // x[feature] > threshold
  double value = 0.0; // mean residual of the samples routed here
  double gain = 0.0;  // squared-error reduction of the split
  std::size_t n_samples = 0;

  bool is_leaf() const noexcept { return feature == kLeaf; }
  friend bool operator==(const TreeNode &, const TreeNode &) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes; // nodes[0] is the root
  std::size_t max_depth = 0;

  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const noexcept;
  friend bool operator==(const RegressionTree &, const RegressionTree &) = default;
};

/// Best split of one node.
struct SplitCandidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

/// Exhaustive split search over the rows in `rows`. Thresholds are midpoints
/// of consecutive distinct values; both sides need min_samples_leaf rows.
/// Equal gains resolve to the lowest feature, then the lowest threshold.
/// The parallel variant searches features concurrently and reduces serially.
SplitCandidate best_split(const MatrixView &X, std::span<const double> residuals,
                          std::span<const std::size_t> rows,
                          std::size_t min_samples_leaf, Exec exec = Exec::serial);

RegressionTree fit_tree(const MatrixView &X, std::span<const double> residuals,
                        std::size_t max_depth, std::size_t min_samples_leaf,
                        Exec exec = Exec::serial);

struct GbtConfig {
  std::size_t n_estimators = 200;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_samples_leaf = 2;

  void validate() const;
};

struct GbtModel {
  std::size_t n_features = 0;
  double base_prediction = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<double> importances; // normalized; all zero when no splits
  bool has_splits = false;
  GbtConfig config;

  // Set when trained through the windowed pipeline.
  std::vector<std::string> feature_names;
  std::size_t window_len = 1;
  std::optional<Scaler> scaler;
};

using StageLoss = LossPoint;

struct GbtFit {
  GbtModel model;
  /// Index m holds the loss after m trees (m = 0 is the base prediction).
  std::vector<StageLoss> stage_loss;
};

/// Squared-error boosting: F0 = mean(y), F_m = F_{m-1} + lr * tree_m.
GbtFit fit_gbt(const MatrixView &X, std::span<const double> y,
               const GbtConfig &config, Exec exec = Exec::serial,
               const MatrixView *X_val = nullptr,
               std::span<const double> y_val = {});

/// Fits on the last row of every window so both model kinds predict the
/// energy of the interval following the window.
GbtFit fit_gbt_windows(const preprocess::WindowedSet &train,
                       const preprocess::WindowedSet &val,
                       const GbtConfig &config, Exec exec = Exec::serial);

/// Prediction on normalized inputs.
double predict_normalized(const GbtModel &model, std::span<const double> x);

/// Prediction after the first `n_trees` trees.
double predict_staged(const GbtModel &model, std::span<const double> x,
                      std::size_t n_trees);

std::vector<double> predict_batch(const GbtModel &model, const MatrixView &X,
                                  Exec exec = Exec::parallel);

/// Raw-unit feature row in, kWh out through the stored scaler.
double predict_gbt(const GbtModel &model, std::span<const double> x);

struct FeatureImportance {
  std::vector<std::pair<std::string, double>> entries;
  bool no_splits = false;
};

FeatureImportance feature_importance(const GbtModel &model);

/// Last rows of all windows as a [count x F] matrix.
std::vector<double> last_rows(const preprocess::WindowedSet &set);

} // namespace nodewatt::gbt

#endif // NODEWATT__GBT_HPP_
