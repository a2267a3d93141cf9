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

#include <gtest/gtest.h>

#include <cmath>

#include "nodewatt/collector.hpp"
#include "nodewatt/preprocess.hpp"
#include "test_util.hpp"

using namespace nodewatt;
using namespace nodewatt::preprocess;
using testutil::column;

namespace {
const double kNaN = std::nan("");
}

TEST(Clean, ConstantSeriesUnchanged) {
  const auto ds = column({1, 2, 3, 4}, {5, 5, 5, 5});
  EXPECT_EQ(clean(ds, 0.1), ds);
}

TEST(Clean, HandComputedOutlier) {
  // mean 20.8, population sd 39.6: z(100) = 2, z(1) = -0.5.
  const auto ds = column({0, 1, 2, 3, 4}, {1, 1, 1, 100, 1});
  const auto out = clean(ds, 2.0);
  EXPECT_EQ(out.targets_kwh, (std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(out.timestamps_ms, (std::vector<TimestampMs>{0, 1000, 2000, 4000}));
}

TEST(Clean, Idempotent) {
  collector::SynthConfig c;
  c.seed = 4;
  c.noise_std = 2.0;
  c.duration_steps = 600;
  const auto once = clean(collector::simulate(c), 2.0);
  EXPECT_EQ(clean(once, 2.0), once);
}

TEST(Clean, InterpolatesInteriorGap) {
  const auto ds = column({2.0, kNaN, 4.0}, {1, 1, 1});
  const auto out = clean(ds);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out.row(1)[0], 3.0);
}

TEST(Clean, InterpolatesInTime) {
  Dataset ds;
  ds.feature_names = {"cpu_user"};
  const double a = 0.0, b = kNaN, c = 9.0;
  ds.push_back(0, {&a, 1}, 1);
  ds.push_back(1000, {&b, 1}, 1);
  ds.push_back(3000, {&c, 1}, 1);
  EXPECT_EQ(clean(ds).row(1)[0], 3.0);
}

TEST(Clean, BoundaryGapsAndNullTargetsDropped) {
  const auto ds = column({kNaN, 1, 2, kNaN}, {1, kNaN, 1, 1});
  const auto out = clean(ds);
  EXPECT_EQ(out.timestamps_ms, (std::vector<TimestampMs>{2000}));
}

TEST(Clean, DropPolicy) {
  const auto ds = column({2.0, kNaN, 4.0}, {1, 1, 1});
  EXPECT_EQ(clean(ds, 3.0, GapPolicy::drop).size(), 2u);
}

TEST(Clean, Errors) {
  EXPECT_ERROR_KIND(clean(Dataset{}), empty_dataset);
  EXPECT_ERROR_KIND(clean(column({1}, {kNaN})), empty_dataset);
  EXPECT_ERROR_KIND(clean(column({1}, {1}), 0.0), configuration);
}

TEST(Scaler, FitAndApply) {
  const auto ds = column({0, 10, 5}, {1, 3, 2});
  const auto s = fit_scaler(ds);
  EXPECT_EQ(s.features[0], (MinMax{0, 10}));
  EXPECT_EQ(s.target, (MinMax{1, 3}));
  const auto n = apply_scaler(s, ds);
  EXPECT_EQ(n.row(0)[0], 0.0);
  EXPECT_EQ(n.row(1)[0], 1.0);
  EXPECT_EQ(n.targets_kwh[2], 0.5);
  EXPECT_EQ(n.scaler, s);
}

TEST(Scaler, ConstantFeatureMapsToZero) {
  const auto ds = column({5, 5, 5}, {1, 2, 3});
  const auto s = fit_scaler(ds);
  EXPECT_EQ(s.features[0], (MinMax{5, 5}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(apply_scaler(s, ds).row(i)[0], 0.0);
}

TEST(Scaler, IndependentColumnsAndNoClamping) {
  Dataset ds;
  ds.feature_names = {"cpu_user", "cpu_freq_mhz"};
  const double r0[2] = {0, 1000}, r1[2] = {10, 3000};
  ds.push_back(0, r0, 0);
  ds.push_back(1, r1, 1);
  const auto s = fit_scaler(ds);
  EXPECT_EQ(s.features[1], (MinMax{1000, 3000}));
  auto val = column({20}, {1});
  Dataset v2;
  v2.feature_names = ds.feature_names;
  const double r2[2] = {20, 5000};
  v2.push_back(0, r2, 2.0);
  const auto n = apply_scaler(s, v2);
  EXPECT_EQ(n.row(0)[0], 2.0);
  EXPECT_EQ(n.row(0)[1], 2.0);
  EXPECT_EQ(n.targets_kwh[0], 2.0);
}

TEST(Scaler, RoundTrip) {
  collector::SynthConfig c;
  const auto ds = collector::simulate(c);
  const auto s = fit_scaler(ds);
  const auto n = apply_scaler(s, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
      const double x = ds.row(i)[j];
      EXPECT_NEAR(s.features[j].invert(n.row(i)[j]), x, 1e-12 * std::abs(x) + 1e-300);
    }
    EXPECT_NEAR(invert_target(s, n.targets_kwh[i]), ds.targets_kwh[i], 1e-12 * ds.targets_kwh[i]);
  }
}

TEST(Scaler, Errors) {
  EXPECT_ERROR_KIND(fit_scaler(Dataset{}), empty_dataset);
  const auto s = fit_scaler(column({1, 2}, {1, 2}));
  EXPECT_ERROR_KIND(apply_scaler(s, column({1}, {1}, "cpu_system")), configuration);
}

TEST(SelectFeatures, DefaultAndSubsets) {
  const auto ds = collector::simulate({});
  const auto names = default_feature_names();
  EXPECT_EQ(names, (std::vector<std::string>{"cpu_user", "cpu_system", "ctx_switches_per_sec",
                                             "irq_rate", "idle_pct", "cpu_freq_mhz"}));
  const auto all = select_features(ds, names);
  EXPECT_EQ(all.n_features(), 6u);
  EXPECT_EQ(all.row(3)[4], ds.row(3)[5]);
  const std::vector<std::string> one{"cpu_user"};
  EXPECT_EQ(select_features(ds, one).n_features(), 1u);
  const std::vector<std::string> gpu{"gpu"};
  EXPECT_ERROR_KIND(select_features(ds, gpu), configuration);
}

TEST(Split, Chronological) {
  std::vector<double> xs(10), ys(10, 1.0);
  for (int i = 0; i < 10; ++i) xs[i] = i;
  const auto ds = column(xs, ys);
  auto [a, b] = split_chronological(ds, 0.2);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(b.size(), 8u);
  std::tie(a, b) = split_chronological(ds, 0.8);
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b.row(0)[0], 8.0);
  std::tie(a, b) = split_chronological(column({1, 2}, {1, 1}), 0.5);
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(b.size(), 1u);
}

TEST(Split, PreservesOrderAndCount) {
  const auto ds = collector::simulate({});
  auto [a, b] = split_chronological(ds, 0.37);
  EXPECT_EQ(a.size() + b.size(), ds.size());
  EXPECT_EQ(a, ds.slice(0, a.size()));
  EXPECT_EQ(b, ds.slice(a.size(), ds.size()));
}

TEST(Split, Errors) {
  const auto ds = column({1, 2, 3}, {1, 1, 1});
  EXPECT_ERROR_KIND(split_chronological(ds, 0.0), configuration);
  EXPECT_ERROR_KIND(split_chronological(ds, 1.0), configuration);
  EXPECT_ERROR_KIND(split_chronological(column({1}, {1}), 0.5), insufficient_data);
}

TEST(Windows, IndexArithmetic) {
  const auto ds = column({0, 1, 2, 3, 4}, {10, 11, 12, 13, 14});
  const auto w = make_windows(ds, 2);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w.window(0)[0], 0.0);
  EXPECT_EQ(w.window(0)[1], 1.0);
  EXPECT_EQ(w.targets[0], 12.0);
  EXPECT_EQ(w.target_timestamps[0], 2000);
  EXPECT_EQ(w.last_row(2)[0], 3.0);
}

TEST(Windows, CountAndErrors) {
  const auto ds = column({0, 1, 2, 3, 4}, {1, 1, 1, 1, 1});
  EXPECT_EQ(make_windows(ds, 1).size(), 4u);
  EXPECT_ERROR_KIND(make_windows(ds, 5), insufficient_data);
  EXPECT_EQ(make_windows(collector::simulate({}), 16).size(), 1000u - 16u);
}
