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
#include <limits>

#include "nodewatt/core.hpp"
#include "nodewatt/rng.hpp"
#include "test_util.hpp"

using namespace nodewatt;

TEST(JoulesToKwh, UnitDefinition) {
  EXPECT_EQ(joules_to_kwh(0.0), 0.0);
  EXPECT_EQ(joules_to_kwh(3'600'000.0), 1.0);
  EXPECT_EQ(joules_to_kwh(1'800'000.0), 0.5);
}

TEST(JoulesToKwh, Linear) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0.0, 1e4), b = rng.uniform(0.0, 1e4);
    const double lhs = joules_to_kwh(a + b);
    const double rhs = joules_to_kwh(a) + joules_to_kwh(b);
    EXPECT_LE(std::abs(lhs - rhs), 4.0 * std::numeric_limits<double>::epsilon() * lhs);
  }
}

TEST(JoulesToKwh, RejectsNegativeAndNonFinite) {
  EXPECT_ERROR_KIND(joules_to_kwh(-1.0), invalid_argument);
  EXPECT_ERROR_KIND(joules_to_kwh(std::nan("")), invalid_argument);
  EXPECT_ERROR_KIND(joules_to_kwh(std::numeric_limits<double>::infinity()), invalid_argument);
}

TEST(CounterDelta, NoWrap) {
  const auto a = EnergyReading::make(0, 1'000, 10'000);
  const auto b = EnergyReading::make(1, 5'000, 10'000);
  EXPECT_EQ(counter_delta(a, b), 4'000u);
}

TEST(CounterDelta, Wrap) {
  const auto a = EnergyReading::make(0, 9'000, 10'000);
  const auto b = EnergyReading::make(1, 500, 10'000);
  EXPECT_EQ(counter_delta(a, b), 500u + (10'000u - 9'000u));
}

TEST(CounterDelta, Identity) {
  const auto a = EnergyReading::make(0, 4'242, 10'000);
  const auto b = EnergyReading::make(5, 4'242, 10'000);
  EXPECT_EQ(counter_delta(a, b), 0u);
}

TEST(CounterDelta, Errors) {
  const auto a = EnergyReading::make(10, 1, 100);
  EXPECT_ERROR_KIND(counter_delta(a, EnergyReading::make(11, 2, 200)), configuration);
  EXPECT_ERROR_KIND(counter_delta(a, EnergyReading::make(10, 2, 100)), ordering);
  EXPECT_ERROR_KIND(counter_delta(a, EnergyReading::make(9, 2, 100)), ordering);
}

TEST(EnergyReading, Invariants) {
  EXPECT_ERROR_KIND(EnergyReading::make(0, 10, 10), invalid_argument);
  EXPECT_ERROR_KIND(EnergyReading::make(0, 0, 0), invalid_argument);
  EXPECT_NO_THROW(EnergyReading::make(0, 9, 10));
}

TEST(FeatureVector, RejectsInsteadOfClamping) {
  EXPECT_ERROR_KIND(testutil::fv(0, 101.0, 0.0, 0, 0, 2000, 0), invalid_argument);
  EXPECT_ERROR_KIND(testutil::fv(0, -0.1), invalid_argument);
  EXPECT_ERROR_KIND(testutil::fv(0, 10, 5, -1.0), invalid_argument);
  EXPECT_ERROR_KIND(testutil::fv(0, 10, 5, 100, -1.0), invalid_argument);
  EXPECT_ERROR_KIND(testutil::fv(0, 10, 5, 100, 1, 0.0), invalid_argument);
  EXPECT_ERROR_KIND(testutil::fv(0, 50, 30, 100, 1, 2000, 21), invalid_argument);
  EXPECT_NO_THROW(testutil::fv(0, 50, 30, 100, 1, 2000, 20.5));
  EXPECT_ERROR_KIND(testutil::fv(0, std::nan("")), invalid_argument);
}

TEST(FeatureVector, CanonicalOrder) {
  const auto v = testutil::fv(7, 1, 2, 3, 4, 5, 6).values();
  EXPECT_EQ(v, (std::array<double, 6>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(kFeatureNames[4], "cpu_freq_mhz");
  EXPECT_EQ(*feature_index("idle_pct"), 5u);
  EXPECT_FALSE(feature_index("gpu").has_value());
}

TEST(Sample, EnergyMustBeNonNegative) {
  EXPECT_ERROR_KIND(Sample(testutil::fv(0), -1e-9), invalid_argument);
  EXPECT_ERROR_KIND(Sample(testutil::fv(0), std::nan("")), invalid_argument);
  EXPECT_EQ(Sample(testutil::fv(0), 0.0).energy_kwh(), 0.0);
}

TEST(NodeRole, ParseAndPrint) {
  EXPECT_TRUE(NodeRole::parse("master").is_master());
  EXPECT_EQ(NodeRole::parse("worker2").worker_index(), 2);
  EXPECT_EQ(NodeRole::parse("worker:3"), NodeRole::worker(3));
  EXPECT_EQ(NodeRole::parse("worker-1").to_string(), "worker1");
  EXPECT_ERROR_KIND(NodeRole::parse("worker0"), invalid_argument);
  EXPECT_ERROR_KIND(NodeRole::worker(0), invalid_argument);
  EXPECT_ERROR_KIND(NodeRole::parse("boss"), invalid_argument);
}

TEST(Dataset, PushBackChecksOrderAndShape) {
  Dataset ds;
  ds.feature_names = {"cpu_user", "cpu_system"};
  const double row[2] = {1, 2};
  ds.push_back(5, row, 0.1);
  EXPECT_ERROR_KIND(ds.push_back(5, row, 0.2), ordering);
  EXPECT_ERROR_KIND(ds.push_back(6, {row, 1}, 0.2), shape);
  EXPECT_EQ(ds.size(), 1u);
}

TEST(Dataset, SamplesRoundTrip) {
  std::vector<Sample> s{{testutil::fv(1000), 1e-6}, {testutil::fv(2000, 20, 1, 100, 1, 2000, 70), 2e-6}};
  const auto ds = Dataset::from_samples(NodeRole::worker(1), s);
  EXPECT_EQ(ds.n_features(), 6u);
  EXPECT_EQ(ds.to_samples(), s);
}

TEST(Rng, DeterministicAndInRange) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    differs = differs || u != c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_TRUE(differs);
}
