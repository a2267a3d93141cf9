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

#include "nodewatt/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nodewatt/error.hpp"

namespace nodewatt::preprocess {

namespace {

Dataset keep_rows(const Dataset &ds, const std::vector<bool> &keep) {
  Dataset out;
  out.node = ds.node;
  out.feature_names = ds.feature_names;
  out.scaler = ds.scaler;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (keep[i]) {
      out.push_back(ds.timestamps_ms[i], ds.row(i), ds.targets_kwh[i]);
    }
  }
  return out;
}

void fill_gaps(Dataset &ds, GapPolicy policy, std::vector<bool> &keep) {
  const auto n = ds.size();
  const auto f = ds.n_features();
  for (std::size_t j = 0; j < f; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      double &v = ds.features[i * f + j];
      if (!std::isnan(v)) continue;
      if (policy == GapPolicy::drop) {
        keep[i] = false;
        continue;
      }
      std::size_t prev = i;
      while (prev > 0 && std::isnan(ds.features[(prev - 1) * f + j])) --prev;
      std::size_t next = i + 1;
      while (next < n && std::isnan(ds.features[next * f + j])) ++next;
      if (prev == 0 || next == n) {
        keep[i] = false; // boundary gap
        continue;
      }
      const std::size_t p = prev - 1;
      const double vp = ds.features[p * f + j];
      const double vq = ds.features[next * f + j];
      const auto tp = static_cast<double>(ds.timestamps_ms[p]);
      const auto tq = static_cast<double>(ds.timestamps_ms[next]);
      const auto ti = static_cast<double>(ds.timestamps_ms[i]);
      v = vp + (vq - vp) * (ti - tp) / (tq - tp);
    }
  }
}

/// Indices flagged as outliers, or empty when none.
std::vector<bool> outlier_mask(std::span<const double> y, double z,
                               bool &any) {
  const auto n = static_cast<double>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  std::vector<bool> flag(y.size(), false);
  any = false;
  if (!(ss > 0.0)) {
    return flag; // zero variance: no outliers
  }
  // n d^2 / ss = z_i^2, compared without dividing so that a z-score landing
  // exactly on the threshold is not lost to rounding.
  const double bound = z * z * ss * (1.0 - 1e-12);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - mean;
    if (n * d * d >= bound) {
      flag[i] = true;
      any = true;
    }
  }
  return flag;
}

} // namespace

Dataset clean(const Dataset &dataset, double z_threshold, GapPolicy gap_policy) {
  if (dataset.empty()) {
    fail(ErrorKind::empty_dataset, "cannot clean an empty dataset");
  }
  if (!(z_threshold > 0.0) || !std::isfinite(z_threshold)) {
    fail(ErrorKind::configuration, "z_threshold must be positive");
  }

  std::vector<bool> keep(dataset.size(), true);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (std::isnan(dataset.targets_kwh[i])) keep[i] = false;
  }
  Dataset ds = keep_rows(dataset, keep);

  keep.assign(ds.size(), true);
  fill_gaps(ds, gap_policy, keep);
  ds = keep_rows(ds, keep);

  while (!ds.empty()) {
    bool any = false;
    auto flag = outlier_mask(ds.targets_kwh, z_threshold, any);
    if (!any) break;
    for (auto &&b : flag) b = !b;
    ds = keep_rows(ds, flag);
  }
  if (ds.empty()) {
    fail(ErrorKind::empty_dataset, "cleaning removed every sample");
  }
  return ds;
}

Scaler fit_scaler(const Dataset &train) {
  if (train.empty()) {
    fail(ErrorKind::empty_dataset, "cannot fit a scaler on no data");
  }
  Scaler s;
  s.feature_names = train.feature_names;
  const auto f = train.n_features();
  constexpr double inf = std::numeric_limits<double>::infinity();
  s.features.assign(f, MinMax{inf, -inf});
  s.target = MinMax{inf, -inf};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto r = train.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      if (!std::isfinite(r[j])) {
        fail(ErrorKind::invalid_argument,
             "non-finite value in training row " + std::to_string(i));
      }
      s.features[j].min = std::min(s.features[j].min, r[j]);
      s.features[j].max = std::max(s.features[j].max, r[j]);
    }
    const double y = train.targets_kwh[i];
    if (!std::isfinite(y)) {
      fail(ErrorKind::invalid_argument,
           "non-finite target in training row " + std::to_string(i));
    }
    s.target.min = std::min(s.target.min, y);
    s.target.max = std::max(s.target.max, y);
  }
  return s;
}

Dataset apply_scaler(const Scaler &scaler, const Dataset &dataset) {
  if (scaler.feature_names != dataset.feature_names ||
      scaler.features.size() != dataset.n_features()) {
    fail(ErrorKind::configuration,
         "scaler features do not match dataset features");
  }
  Dataset out = dataset;
  const auto f = dataset.n_features();
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      r[j] = scaler.features[j].scale(r[j]);
    }
    out.targets_kwh[i] = scaler.target.scale(out.targets_kwh[i]);
  }
  out.scaler = scaler;
  return out;
}

double invert_target(const Scaler &scaler, double normalized) {
  return scaler.target.invert(normalized);
}

std::vector<std::string> default_feature_names() {
  return {kDefaultFeatureSelection.begin(), kDefaultFeatureSelection.end()};
}

Dataset select_features(const Dataset &dataset,
                        std::span<const std::string> names) {
  if (names.empty()) {
    fail(ErrorKind::configuration, "no features selected");
  }
  std::vector<std::size_t> cols;
  for (const auto &name : names) {
    const auto it = std::find(dataset.feature_names.begin(),
                              dataset.feature_names.end(), name);
    if (it == dataset.feature_names.end()) {
      fail(ErrorKind::configuration, "unknown feature '" + name + "'");
    }
    const auto c = static_cast<std::size_t>(it - dataset.feature_names.begin());
    if (std::find(cols.begin(), cols.end(), c) != cols.end()) {
      fail(ErrorKind::configuration, "feature '" + name + "' selected twice");
    }
    cols.push_back(c);
  }
  Dataset out;
  out.node = dataset.node;
  out.feature_names.assign(names.begin(), names.end());
  out.timestamps_ms = dataset.timestamps_ms;
  out.targets_kwh = dataset.targets_kwh;
  out.features.reserve(dataset.size() * cols.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto r = dataset.row(i);
    for (auto c : cols) out.features.push_back(r[c]);
  }
  return out;
}

std::pair<Dataset, Dataset> split_chronological(const Dataset &dataset,
                                                double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::configuration, "train_fraction must lie in (0,1)");
  }
  if (dataset.size() < 2) {
    fail(ErrorKind::insufficient_data, "need at least 2 samples to split");
  }
  const auto n = dataset.size();
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction + 1e-9));
  return {dataset.slice(0, n_train), dataset.slice(n_train, n)};
}

WindowedSet make_windows(const Dataset &dataset, std::size_t window_len) {
  if (window_len == 0) {
    fail(ErrorKind::configuration, "window_len must be positive");
  }
  if (dataset.size() <= window_len) {
    fail(ErrorKind::insufficient_data,
         std::to_string(dataset.size()) + " samples cannot fill a window of " +
             std::to_string(window_len) + " plus a target");
  }
  WindowedSet w;
  w.window_len = window_len;
  w.feature_names = dataset.feature_names;
  w.scaler = dataset.scaler;
  const auto f = dataset.n_features();
  const auto count = dataset.size() - window_len;
  w.inputs.reserve(count * window_len * f);
  for (std::size_t t = window_len; t < dataset.size(); ++t) {
    w.inputs.insert(w.inputs.end(),
                    dataset.features.begin() + (t - window_len) * f,
                    dataset.features.begin() + t * f);
    w.targets.push_back(dataset.targets_kwh[t]);
    w.target_timestamps.push_back(dataset.timestamps_ms[t]);
  }
  return w;
}

} // namespace nodewatt::preprocess
