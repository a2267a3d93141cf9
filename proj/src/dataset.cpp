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

#include "nodewatt/dataset.hpp"

#include <cmath>

#include "nodewatt/error.hpp"

namespace nodewatt {

void Dataset::push_back(TimestampMs ts, std::span<const double> values,
                        double target_kwh) {
  if (values.size() != n_features()) {
    fail(ErrorKind::shape, "row has " + std::to_string(values.size()) +
                               " values, dataset has " +
                               std::to_string(n_features()) + " features");
  }
  if (!timestamps_ms.empty() && ts <= timestamps_ms.back()) {
    fail(ErrorKind::ordering,
         "timestamp " + std::to_string(ts) + " does not follow " +
             std::to_string(timestamps_ms.back()));
  }
  timestamps_ms.push_back(ts);
  features.insert(features.end(), values.begin(), values.end());
  targets_kwh.push_back(target_kwh);
}

Dataset Dataset::slice(std::size_t first, std::size_t last) const {
  if (first > last || last > size()) {
    fail(ErrorKind::invalid_argument, "slice bounds out of range");
  }
  Dataset out;
  out.node = node;
  out.feature_names = feature_names;
  out.scaler = scaler;
  const auto f = n_features();
  out.timestamps_ms.assign(timestamps_ms.begin() + first,
                           timestamps_ms.begin() + last);
  out.features.assign(features.begin() + first * f,
                      features.begin() + last * f);
  out.targets_kwh.assign(targets_kwh.begin() + first,
                         targets_kwh.begin() + last);
  return out;
}

Dataset Dataset::from_samples(NodeRole node, std::span<const Sample> samples) {
  Dataset out;
  out.node = node;
  out.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  out.timestamps_ms.reserve(samples.size());
  out.features.reserve(samples.size() * kFeatureCount);
  out.targets_kwh.reserve(samples.size());
  for (const auto &s : samples) {
    const auto values = s.features().values();
    out.push_back(s.timestamp_ms(), values, s.energy_kwh());
  }
  return out;
}

std::vector<Sample> Dataset::to_samples() const {
  std::array<std::size_t, kFeatureCount> column{};
  if (n_features() != kFeatureCount) {
    fail(ErrorKind::configuration,
         "dataset does not carry the full canonical feature set");
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    bool found = false;
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
      if (feature_names[j] == kFeatureNames[c]) {
        column[c] = j;
        found = true;
      }
    }
    if (!found) {
      fail(ErrorKind::configuration,
           "dataset lacks column " + std::string(kFeatureNames[c]));
    }
  }
  std::vector<Sample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto r = row(i);
    for (double v : r) {
      if (std::isnan(v)) {
        fail(ErrorKind::invalid_argument,
             "row " + std::to_string(i) + " has a missing value");
      }
    }
    FeatureVector::Fields f;
    f.timestamp_ms = timestamps_ms[i];
    f.cpu_user = r[column[0]];
    f.cpu_system = r[column[1]];
    f.ctx_switches_per_sec = r[column[2]];
    f.irq_rate = r[column[3]];
    f.cpu_freq_mhz = r[column[4]];
    f.idle_pct = r[column[5]];
    out.emplace_back(FeatureVector(f), targets_kwh[i]);
  }
  return out;
}

} // namespace nodewatt
