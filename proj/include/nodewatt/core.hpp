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

#ifndef NODEWATT__CORE_HPP_
#define NODEWATT__CORE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nodewatt {

using TimestampMs = std::int64_t;

/// Master, or Worker with a 1-based index.
class NodeRole {
public:
  static NodeRole master() { return NodeRole(0); }
  static NodeRole worker(int index);

  /// Accepts "master", "worker1", "worker:1" and "worker-1".
  static NodeRole parse(std::string_view text);

  bool is_master() const noexcept { return index_ == 0; }
  int worker_index() const noexcept { return index_; }
  std::string to_string() const;

  friend bool operator==(const NodeRole &, const NodeRole &) = default;

private:
  explicit NodeRole(int index) : index_(index) {}
  int index_;
};

inline constexpr std::size_t kFeatureCount = 6;

/// Canonical column names, in FeatureVector field order.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "cpu_user",     "cpu_system",   "ctx_switches_per_sec",
    "irq_rate",     "cpu_freq_mhz", "idle_pct"};

/// Default selection order for model inputs.
inline constexpr std::array<std::string_view, kFeatureCount>
    kDefaultFeatureSelection = {"cpu_user", "cpu_system",
                                "ctx_switches_per_sec", "irq_rate",
                                "idle_pct", "cpu_freq_mhz"};

std::optional<std::size_t> feature_index(std::string_view name) noexcept;

/// One validated snapshot of the CPU metrics of a node.
class FeatureVector {
public:
  struct Fields {
    TimestampMs timestamp_ms = 0;
    double cpu_user = 0.0;
    double cpu_system = 0.0;
    double ctx_switches_per_sec = 0.0;
    double irq_rate = 0.0;
    double cpu_freq_mhz = 0.0;
    double idle_pct = 0.0;
  };

  /// Tolerance on cpu_user + cpu_system + idle_pct <= 100.
  static constexpr double kPercentSlack = 0.5;

  /// Throws Error(invalid_argument) on any violated invariant; never clamps.
  explicit FeatureVector(const Fields &fields);

  TimestampMs timestamp_ms() const noexcept { return f_.timestamp_ms; }
  double cpu_user() const noexcept { return f_.cpu_user; }
  double cpu_system() const noexcept { return f_.cpu_system; }
  double ctx_switches_per_sec() const noexcept {
    return f_.ctx_switches_per_sec;
  }
  double irq_rate() const noexcept { return f_.irq_rate; }
  double cpu_freq_mhz() const noexcept { return f_.cpu_freq_mhz; }
  double idle_pct() const noexcept { return f_.idle_pct; }
  const Fields &fields() const noexcept { return f_; }

  /// Values in kFeatureNames order.
  std::array<double, kFeatureCount> values() const noexcept;
  double value(std::size_t canonical_index) const;

  friend bool operator==(const FeatureVector &a, const FeatureVector &b) {
    return a.values() == b.values() && a.timestamp_ms() == b.timestamp_ms();
  }

private:
  Fields f_;
};

/// Cumulative RAPL-style energy counter sample.
struct EnergyReading {
  TimestampMs timestamp_ms = 0;
  std::uint64_t cumulative_uj = 0;
  std::uint64_t max_range_uj = 1;

  /// Throws Error(invalid_argument) when cumulative_uj >= max_range_uj or
  /// max_range_uj == 0.
  static EnergyReading make(TimestampMs ts, std::uint64_t cumulative_uj,
                            std::uint64_t max_range_uj);
};

/// Features plus the energy consumed over the sampling interval.
class Sample {
public:
  Sample(FeatureVector features, double energy_kwh);

  const FeatureVector &features() const noexcept { return features_; }
  double energy_kwh() const noexcept { return energy_kwh_; }
  TimestampMs timestamp_ms() const noexcept {
    return features_.timestamp_ms();
  }

  friend bool operator==(const Sample &, const Sample &) = default;

private:
  FeatureVector features_;
  double energy_kwh_;
};

inline constexpr double kJoulesPerKwh = 3'600'000.0;

double joules_to_kwh(double joules);

inline double microjoules_to_joules(std::uint64_t uj) {
  return static_cast<double>(uj) * 1e-6;
}

/// Energy consumed between two counter readings, accounting for one wrap.
std::uint64_t counter_delta(const EnergyReading &prev,
                            const EnergyReading &curr);

} // namespace nodewatt

#endif // NODEWATT__CORE_HPP_
