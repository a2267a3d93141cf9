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

#include "nodewatt/gbt.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "nodewatt/error.hpp"

namespace nodewatt::gbt {

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto &n = nodes[i];
    i = static_cast<std::size_t>(
        x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                              : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode &n) { return n.is_leaf(); }));
}

namespace {

SplitCandidate best_split_for_feature(const MatrixView &X,
                                      std::span<const double> r,
                                      std::span<const std::size_t> rows,
                                      std::size_t feature,
                                      std::size_t min_leaf) {
  SplitCandidate best;
  const std::size_t n = rows.size();
  if (n < 2 * std::max<std::size_t>(min_leaf, 1)) return best;

  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double xa = X(a, feature), xb = X(b, feature);
    return xa < xb || (xa == xb && a < b);
  });

  double total = 0.0;
  for (auto i : order) total += r[i];
  const double parent = total * total / static_cast<double>(n);

  double left = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    left += r[order[k]];
    const double xk = X(order[k], feature);
    const double xn = X(order[k + 1], feature);
    if (!(xk < xn)) continue;
    const std::size_t nl = k + 1, nr = n - nl;
    if (nl < min_leaf || nr < min_leaf) continue;
    const double right = total - left;
    const double gain = left * left / static_cast<double>(nl) +
                        right * right / static_cast<double>(nr) - parent;
    if (gain > best.gain) {
      best.found = true;
      best.feature = feature;
      best.threshold = xk + (xn - xk) / 2.0;
      best.gain = gain;
    }
  }
  return best;
}

} // namespace

SplitCandidate best_split(const MatrixView &X, std::span<const double> residuals,
                          std::span<const std::size_t> rows,
                          std::size_t min_samples_leaf, Exec exec) {
  std::vector<SplitCandidate> per_feature(X.cols);
  const auto f = static_cast<std::ptrdiff_t>(X.cols);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < f; ++j) {
      per_feature[j] = best_split_for_feature(X, residuals, rows, j,
                                              min_samples_leaf);
    }
  } else {
    for (std::ptrdiff_t j = 0; j < f; ++j) {
      per_feature[j] = best_split_for_feature(X, residuals, rows, j,
                                              min_samples_leaf);
    }
  }
  SplitCandidate best;
  for (const auto &c : per_feature) {
    if (c.found && c.gain > best.gain) best = c;
  }
  return best;
}

RegressionTree fit_tree(const MatrixView &X, std::span<const double> residuals,
                        std::size_t max_depth, std::size_t min_samples_leaf,
                        Exec exec) {
  if (X.rows == 0 || residuals.empty()) {
    fail(ErrorKind::invalid_argument, "cannot fit a tree on no samples");
  }
  if (residuals.size() != X.rows || X.data.size() != X.rows * X.cols) {
    fail(ErrorKind::shape, "feature matrix and residuals disagree in size");
  }

  RegressionTree tree;
  tree.max_depth = max_depth;

  struct Pending {
    std::size_t node;
    std::size_t depth;
    std::vector<std::size_t> rows;
  };
  std::vector<std::size_t> all(X.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});

  auto make_node = [&](const std::vector<std::size_t> &rows) {
    TreeNode node;
    double sum = 0.0;
    for (auto i : rows) sum += residuals[i];
    node.value = sum / static_cast<double>(rows.size());
    node.n_samples = rows.size();
    tree.nodes.push_back(node);
    return tree.nodes.size() - 1;
  };

  std::deque<Pending> queue;
  queue.push_back({make_node(all), 0, std::move(all)});
  while (!queue.empty()) {
    Pending p = std::move(queue.front());
    queue.pop_front();
    if (p.depth >= max_depth) continue;

    const auto [lo, hi] = std::minmax_element(
        p.rows.begin(), p.rows.end(),
        [&](std::size_t a, std::size_t b) { return residuals[a] < residuals[b]; });
    if (residuals[*lo] == residuals[*hi]) continue; // zero variance

    const auto split = best_split(X, residuals, p.rows, min_samples_leaf, exec);
    if (!split.found) continue;

    std::vector<std::size_t> left, right;
    for (auto i : p.rows) {
      (X(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    assert(!left.empty() && !right.empty());
    const auto l = make_node(left);
    const auto r = make_node(right);
    auto &node = tree.nodes[p.node];
    node.feature = static_cast<int>(split.feature);
    node.threshold = split.threshold;
    node.gain = split.gain;
    node.left = static_cast<int>(l);
    node.right = static_cast<int>(r);
    queue.push_back({l, p.depth + 1, std::move(left)});
    queue.push_back({r, p.depth + 1, std::move(right)});
  }
  return tree;
}

void GbtConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    fail(ErrorKind::configuration, "learning_rate must lie in (0,1]");
  }
  if (min_samples_leaf < 1) {
    fail(ErrorKind::configuration, "min_samples_leaf must be >= 1");
  }
}

namespace {

double mse_of(std::span<const double> y, std::span<const double> f) {
  if (y.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - f[i];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

} // namespace

GbtFit fit_gbt(const MatrixView &X, std::span<const double> y,
               const GbtConfig &config, Exec exec, const MatrixView *X_val,
               std::span<const double> y_val) {
  config.validate();
  if (X.rows < 2) {
    fail(ErrorKind::invalid_argument, "boosting needs at least 2 samples");
  }
  if (y.size() != X.rows || X.data.size() != X.rows * X.cols) {
    fail(ErrorKind::shape, "feature matrix and targets disagree in size");
  }
  const bool has_val = X_val != nullptr && X_val->rows > 0;
  if (has_val && (X_val->cols != X.cols || y_val.size() != X_val->rows)) {
    fail(ErrorKind::shape, "validation matrix does not match training shape");
  }

  GbtFit fit;
  auto &m = fit.model;
  m.n_features = X.cols;
  m.learning_rate = config.learning_rate;
  m.config = config;
  m.base_prediction =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> F(X.rows, m.base_prediction);
  std::vector<double> F_val(has_val ? X_val->rows : 0, m.base_prediction);
  std::vector<double> residual(X.rows);
  std::vector<double> gains(X.cols, 0.0);

  fit.stage_loss.push_back(
      {mse_of(y, F), has_val ? mse_of(y_val, F_val)
                             : std::numeric_limits<double>::quiet_NaN()});
  m.trees.reserve(config.n_estimators);
  for (std::size_t t = 0; t < config.n_estimators; ++t) {
    for (std::size_t i = 0; i < X.rows; ++i) residual[i] = y[i] - F[i];
    auto tree = fit_tree(X, residual, config.max_depth,
                         config.min_samples_leaf, exec);
    for (const auto &node : tree.nodes) {
      if (!node.is_leaf()) {
        gains[static_cast<std::size_t>(node.feature)] += node.gain;
      }
    }
    for (std::size_t i = 0; i < X.rows; ++i) {
      F[i] += config.learning_rate * tree.predict(X.row(i));
    }
    if (has_val) {
      for (std::size_t i = 0; i < X_val->rows; ++i) {
        F_val[i] += config.learning_rate * tree.predict(X_val->row(i));
      }
    }
    fit.stage_loss.push_back(
        {mse_of(y, F), has_val ? mse_of(y_val, F_val)
                               : std::numeric_limits<double>::quiet_NaN()});
    m.trees.push_back(std::move(tree));
  }

  const double total = std::accumulate(gains.begin(), gains.end(), 0.0);
  m.has_splits = total > 0.0;
  m.importances.assign(X.cols, 0.0);
  if (m.has_splits) {
    for (std::size_t j = 0; j < X.cols; ++j) m.importances[j] = gains[j] / total;
  }
  return fit;
}

std::vector<double> last_rows(const preprocess::WindowedSet &set) {
  std::vector<double> out;
  out.reserve(set.size() * set.n_features());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = set.last_row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

GbtFit fit_gbt_windows(const preprocess::WindowedSet &train,
                       const preprocess::WindowedSet &val,
                       const GbtConfig &config, Exec exec) {
  const auto F = train.n_features();
  const auto X = last_rows(train);
  const MatrixView Xv{X, train.size(), F};
  std::vector<double> Xval_data;
  MatrixView Xval;
  if (val.size() > 0) {
    if (val.n_features() != F) {
      fail(ErrorKind::shape, "validation windows have a different width");
    }
    Xval_data = last_rows(val);
    Xval = MatrixView{Xval_data, val.size(), F};
  }
  auto fit = fit_gbt(Xv, train.targets, config, exec,
                     val.size() > 0 ? &Xval : nullptr, val.targets);
  fit.model.feature_names = train.feature_names;
  fit.model.window_len = train.window_len;
  fit.model.scaler = train.scaler;
  return fit;
}

double predict_staged(const GbtModel &model, std::span<const double> x,
                      std::size_t n_trees) {
  if (x.size() != model.n_features) {
    fail(ErrorKind::shape, "expected " + std::to_string(model.n_features) +
                               " features, got " + std::to_string(x.size()));
  }
  // Same accumulation order as fit_gbt, so training predictions reproduce.
  double f = model.base_prediction;
  const auto n = std::min(n_trees, model.trees.size());
  for (std::size_t t = 0; t < n; ++t) {
    f += model.learning_rate * model.trees[t].predict(x);
  }
  return f;
}

double predict_normalized(const GbtModel &model, std::span<const double> x) {
  return predict_staged(model, x, model.trees.size());
}

std::vector<double> predict_batch(const GbtModel &model, const MatrixView &X,
                                  Exec exec) {
  if (X.cols != model.n_features) {
    fail(ErrorKind::shape, "feature matrix width does not match the model");
  }
  std::vector<double> out(X.rows);
  const auto n = static_cast<std::ptrdiff_t>(X.rows);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = predict_normalized(model, X.row(i));
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = predict_normalized(model, X.row(i));
    }
  }
  return out;
}

double predict_gbt(const GbtModel &model, std::span<const double> x) {
  if (x.size() != model.n_features) {
    fail(ErrorKind::shape, "expected " + std::to_string(model.n_features) +
                               " features, got " + std::to_string(x.size()));
  }
  if (!model.scaler) return predict_normalized(model, x);
  std::vector<double> scaled(x.begin(), x.end());
  for (std::size_t j = 0; j < scaled.size(); ++j) {
    scaled[j] = model.scaler->features[j].scale(scaled[j]);
  }
  return preprocess::invert_target(*model.scaler,
                                   predict_normalized(model, scaled));
}

FeatureImportance feature_importance(const GbtModel &model) {
  FeatureImportance out;
  out.no_splits = !model.has_splits;
  for (std::size_t j = 0; j < model.n_features; ++j) {
    std::string name = j < model.feature_names.size()
                           ? model.feature_names[j]
                           : "f" + std::to_string(j);
    const double v = j < model.importances.size() ? model.importances[j] : 0.0;
    out.entries.emplace_back(std::move(name), v);
  }
  return out;
}

} // namespace nodewatt::gbt
