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

#include "nodewatt/core.hpp"

#include <charconv>
#include <cmath>

#include "nodewatt/error.hpp"

namespace nodewatt {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::invalid_argument: return "invalid-argument";
  case ErrorKind::configuration: return "configuration";
  case ErrorKind::ordering: return "ordering";
  case ErrorKind::parse: return "parse";
  case ErrorKind::missing_aggregate: return "missing-aggregate";
  case ErrorKind::io: return "io";
  case ErrorKind::shape: return "shape";
  case ErrorKind::numeric: return "numeric";
  case ErrorKind::contract: return "contract";
  case ErrorKind::insufficient_data: return "insufficient-data";
  case ErrorKind::empty_dataset: return "empty-dataset";
  case ErrorKind::schema: return "schema";
  case ErrorKind::unsupported_version: return "unsupported-version";
  }
  return "unknown";
}

bool Error::is_validation() const noexcept {
  switch (kind_) {
  case ErrorKind::io:
  case ErrorKind::numeric:
  case ErrorKind::schema:
  case ErrorKind::unsupported_version:
    return false;
  default:
    return true;
  }
}

NodeRole NodeRole::worker(int index) {
  if (index < 1) {
    fail(ErrorKind::invalid_argument,
         "worker index must be >= 1, got " + std::to_string(index));
  }
  return NodeRole(index);
}

NodeRole NodeRole::parse(std::string_view text) {
  if (text == "master") {
    return master();
  }
  constexpr std::string_view prefix = "worker";
  if (text.substr(0, prefix.size()) == prefix) {
    auto rest = text.substr(prefix.size());
    if (!rest.empty() && (rest.front() == ':' || rest.front() == '-')) {
      rest.remove_prefix(1);
    }
    int index = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(),
                                     index);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && !rest.empty()) {
      return worker(index);
    }
  }
  fail(ErrorKind::invalid_argument,
       "unrecognized node role '" + std::string(text) + "'");
}

std::string NodeRole::to_string() const {
  return is_master() ? std::string("master")
                     : "worker" + std::to_string(index_);
}

std::optional<std::size_t> feature_index(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) {
      return i;
    }
  }
  return std::nullopt;
}

namespace {

void require_percent(double v, const char *name) {
  if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
    fail(ErrorKind::invalid_argument,
         std::string(name) + " must be a percent in [0,100], got " +
             std::to_string(v));
  }
}

void require_rate(double v, const char *name) {
  if (!std::isfinite(v) || v < 0.0) {
    fail(ErrorKind::invalid_argument,
         std::string(name) + " must be finite and >= 0, got " +
             std::to_string(v));
  }
}

} // namespace

FeatureVector::FeatureVector(const Fields &fields) : f_(fields) {
  require_percent(f_.cpu_user, "cpu_user");
  require_percent(f_.cpu_system, "cpu_system");
  require_percent(f_.idle_pct, "idle_pct");
  require_rate(f_.ctx_switches_per_sec, "ctx_switches_per_sec");
  require_rate(f_.irq_rate, "irq_rate");
  if (!std::isfinite(f_.cpu_freq_mhz) || f_.cpu_freq_mhz <= 0.0) {
    fail(ErrorKind::invalid_argument,
         "cpu_freq_mhz must be positive, got " +
             std::to_string(f_.cpu_freq_mhz));
  }
  if (f_.cpu_user + f_.cpu_system + f_.idle_pct > 100.0 + kPercentSlack) {
    fail(ErrorKind::invalid_argument,
         "cpu_user + cpu_system + idle_pct exceeds 100");
  }
}

std::array<double, kFeatureCount> FeatureVector::values() const noexcept {
  return {f_.cpu_user, f_.cpu_system,   f_.ctx_switches_per_sec,
          f_.irq_rate, f_.cpu_freq_mhz, f_.idle_pct};
}

double FeatureVector::value(std::size_t canonical_index) const {
  if (canonical_index >= kFeatureCount) {
    fail(ErrorKind::invalid_argument, "feature index out of range");
  }
  return values()[canonical_index];
}

EnergyReading EnergyReading::make(TimestampMs ts, std::uint64_t cumulative_uj,
                                  std::uint64_t max_range_uj) {
  if (max_range_uj == 0) {
    fail(ErrorKind::invalid_argument, "max_range_uj must be positive");
  }
  if (cumulative_uj >= max_range_uj) {
    fail(ErrorKind::invalid_argument,
         "cumulative_uj " + std::to_string(cumulative_uj) +
             " not below max_range_uj " + std::to_string(max_range_uj));
  }
  return EnergyReading{ts, cumulative_uj, max_range_uj};
}

Sample::Sample(FeatureVector features, double energy_kwh)
    : features_(features), energy_kwh_(energy_kwh) {
  if (!std::isfinite(energy_kwh) || energy_kwh < 0.0) {
    fail(ErrorKind::invalid_argument,
         "energy_kwh must be finite and >= 0, got " +
             std::to_string(energy_kwh));
  }
}

double joules_to_kwh(double joules) {
  if (!std::isfinite(joules) || joules < 0.0) {
    fail(ErrorKind::invalid_argument,
         "joules must be finite and >= 0, got " + std::to_string(joules));
  }
  return joules / kJoulesPerKwh;
}

std::uint64_t counter_delta(const EnergyReading &prev,
                            const EnergyReading &curr) {
  if (prev.max_range_uj != curr.max_range_uj) {
    fail(ErrorKind::configuration, "energy counters disagree on max range");
  }
  if (curr.timestamp_ms <= prev.timestamp_ms) {
    fail(ErrorKind::ordering, "energy readings are not time-ordered");
  }
  if (curr.cumulative_uj >= prev.cumulative_uj) {
    return curr.cumulative_uj - prev.cumulative_uj;
  }
  return curr.cumulative_uj + (curr.max_range_uj - prev.cumulative_uj);
}

} // namespace nodewatt
