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

// Exhaustive greedy regression tree and boosting loop written from the
// textbook definitions. Split quality is the directly summed squared error
// of both children, not the running-sum gain used by the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

namespace oracle {

struct RefNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  double value = 0.0;
  std::vector<std::size_t> rows;
  std::unique_ptr<RefNode> left, right;
};

struct RefSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = 0.0;        // children SSE of the best split
  double runner_up = 0.0;  // children SSE of the best split on another partition
};

inline double mean_of(const std::vector<double> &r, const std::vector<std::size_t> &rows) {
  double s = 0.0;
  for (auto i : rows) s += r[i];
  return s / static_cast<double>(rows.size());
}

inline double sse_of(const std::vector<double> &r, const std::vector<std::size_t> &rows) {
  if (rows.empty()) return 0.0;
  const double m = mean_of(r, rows);
  double s = 0.0;
  for (auto i : rows) s += (r[i] - m) * (r[i] - m);
  return s;
}

// X is row-major n x f.
inline RefSplit search(const std::vector<double> &X, std::size_t f,
                       const std::vector<double> &r,
                       const std::vector<std::size_t> &rows,
                       std::size_t min_leaf) {
  RefSplit best;
  best.sse = std::numeric_limits<double>::infinity();
  best.runner_up = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_left;
  const double parent = sse_of(r, rows);
  for (std::size_t j = 0; j < f; ++j) {
    std::vector<double> vals;
    for (auto i : rows) vals.push_back(X[i * f + j]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double t = (vals[k] + vals[k + 1]) / 2.0;
      std::vector<std::size_t> l, rr;
      for (auto i : rows) (X[i * f + j] <= t ? l : rr).push_back(i);
      if (l.size() < min_leaf || rr.size() < min_leaf) continue;
      const double s = sse_of(r, l) + sse_of(r, rr);
      if (!(s < parent)) continue;
      if (s < best.sse) {
        if (best.found && l != best_left) best.runner_up = best.sse;
        best = {true, j, t, s, best.runner_up};
        best_left = l;
      } else if (l != best_left && s < best.runner_up) {
        best.runner_up = s;
      }
    }
  }
  return best;
}

inline std::unique_ptr<RefNode> grow(const std::vector<double> &X, std::size_t f,
                                     const std::vector<double> &r,
                                     std::vector<std::size_t> rows, std::size_t depth,
                                     std::size_t max_depth, std::size_t min_leaf) {
  auto node = std::make_unique<RefNode>();
  node->value = mean_of(r, rows);
  node->rows = rows;
  if (depth >= max_depth) return node;
  bool constant = true;
  for (auto i : rows) constant = constant && r[i] == r[rows[0]];
  if (constant) return node;
  const auto s = search(X, f, r, rows, min_leaf);
  if (!s.found) return node;
  std::vector<std::size_t> l, rr;
  for (auto i : rows) (X[i * f + s.feature] <= s.threshold ? l : rr).push_back(i);
  node->leaf = false;
  node->feature = s.feature;
  node->threshold = s.threshold;
  node->left = grow(X, f, r, l, depth + 1, max_depth, min_leaf);
  node->right = grow(X, f, r, rr, depth + 1, max_depth, min_leaf);
  return node;
}

inline double predict(const RefNode &n, const double *x) {
  if (n.leaf) return n.value;
  return x[n.feature] <= n.threshold ? predict(*n.left, x) : predict(*n.right, x);
}

// Sum over leaves of squared residual error.
inline double tree_loss(const RefNode &n, const std::vector<double> &r) {
  if (n.leaf) {
    double s = 0.0;
    for (auto i : n.rows) s += (r[i] - n.value) * (r[i] - n.value);
    return s;
  }
  return tree_loss(*n.left, r) + tree_loss(*n.right, r);
}

// Plain boosting loop; returns training predictions after all trees.
inline std::vector<double> boost(const std::vector<double> &X, std::size_t f,
                                 const std::vector<double> &y, std::size_t trees,
                                 double lr, std::size_t max_depth, std::size_t min_leaf) {
  const std::size_t n = y.size();
  double base = 0.0;
  for (double v : y) base += v;
  base /= static_cast<double>(n);
  std::vector<double> F(n, base);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t m = 0; m < trees; ++m) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - F[i];
    const auto t = grow(X, f, r, all, 0, max_depth, min_leaf);
    for (std::size_t i = 0; i < n; ++i) F[i] += lr * predict(*t, &X[i * f]);
  }
  return F;
}

// True when every split in every stage beats both its runner-up and "no
// split" by more than tol, so the greedy result is well defined.
inline bool unambiguous(const RefNode &n, const std::vector<double> &X, std::size_t f,
                        const std::vector<double> &r, std::size_t min_leaf, double tol) {
  if (n.leaf) return true;
  const auto s = search(X, f, r, n.rows, min_leaf);
  return s.runner_up - s.sse > tol && sse_of(r, n.rows) - s.sse > tol &&
         unambiguous(*n.left, X, f, r, min_leaf, tol) && unambiguous(*n.right, X, f, r, min_leaf, tol);
}

inline bool boost_unambiguous(const std::vector<double> &X, std::size_t f,
                              const std::vector<double> &y, std::size_t trees, double lr,
                              std::size_t max_depth, std::size_t min_leaf, double tol) {
  const std::size_t n = y.size();
  double base = 0.0;
  for (double v : y) base += v;
  base /= static_cast<double>(n);
  std::vector<double> F(n, base);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t m = 0; m < trees; ++m) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - F[i];
    const auto t = grow(X, f, r, all, 0, max_depth, min_leaf);
    if (!unambiguous(*t, X, f, r, min_leaf, tol)) return false;
    for (std::size_t i = 0; i < n; ++i) F[i] += lr * predict(*t, &X[i * f]);
  }
  return true;
}

} // namespace oracle
