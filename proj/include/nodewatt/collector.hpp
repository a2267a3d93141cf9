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

#ifndef NODEWATT__COLLECTOR_HPP_
#define NODEWATT__COLLECTOR_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodewatt/core.hpp"
#include "nodewatt/dataset.hpp"

namespace nodewatt::collector {

// ---------------------------------------------------------------------------
// mpstat capture parsing
// ---------------------------------------------------------------------------

/// The "all" aggregate row of one mpstat report.
struct MpstatRow {
  TimestampMs timestamp_ms = 0;
  double pct_usr = 0.0;
  double pct_nice = 0.0;
  double pct_sys = 0.0;
  double pct_iowait = 0.0;
  double pct_irq = 0.0;
  double pct_soft = 0.0;
  double pct_steal = 0.0;
  double pct_guest = 0.0;
  double pct_gnice = 0.0;
  double pct_idle = 0.0;
};

/// One report: the aggregate row plus the companion lines that followed it
/// in the capture ("ctxt N" from /proc/stat, "cpu MHz : X" from cpuinfo).
struct MpstatBlock {
  MpstatRow all;
  std::optional<std::uint64_t> ctxt;
  std::optional<double> cpu_mhz;
  std::size_t line = 0; // 1-based line of the aggregate row
};

struct MpstatOptions {
  double default_freq_mhz = 2000.0;
  /// Midnight (UTC, ms) of the first report when the capture has no
  /// "Linux ..." banner carrying a date.
  TimestampMs base_date_ms = 0;
};

/// Splits a capture into report blocks. Malformed aggregate rows raise
/// Error(parse) naming the line; a report header without an "all" row raises
/// Error(missing_aggregate).
std::vector<MpstatBlock> parse_mpstat_blocks(std::string_view text,
                                             const MpstatOptions &opts = {});

/// FeatureVector for the interval ending at `curr`.
FeatureVector features_from_blocks(const MpstatBlock &prev,
                                   const MpstatBlock &curr,
                                   const MpstatOptions &opts = {});

/// Parses two consecutive report blocks and returns the features of the
/// second interval.
FeatureVector parse_mpstat_interval(std::string_view text,
                                    const MpstatOptions &opts = {});

// ---------------------------------------------------------------------------
// Energy counters
// ---------------------------------------------------------------------------

/// Reads the cumulative and max-range files (RAPL powercap layout) and
/// stamps the reading with the current wall clock.
EnergyReading read_energy_counter(const std::filesystem::path &value_file,
                                  const std::filesystem::path &max_range_file);

/// `dir/energy_uj` and `dir/max_energy_range_uj`.
EnergyReading read_energy_counter(const std::filesystem::path &rapl_dir);

/// Parses a non-negative integer counter file body (surrounding whitespace
/// allowed).
std::uint64_t parse_counter_value(std::string_view text);

/// Energy log: one "<timestamp_ms> <cumulative_uj>" pair per line.
std::vector<EnergyReading> parse_energy_log(std::string_view text,
                                            std::uint64_t max_range_uj);

/// Pairs report blocks with energy readings one-to-one and produces one
/// Sample per interval (n blocks -> n-1 samples).
std::vector<Sample> assemble_samples(std::span<const MpstatBlock> blocks,
                                     std::span<const EnergyReading> readings,
                                     const MpstatOptions &opts = {});

// ---------------------------------------------------------------------------
// Synthetic node simulator
// ---------------------------------------------------------------------------

enum class WorkloadProfile { idle, ramp, bursty, diurnal, steady };

std::string_view to_string(WorkloadProfile p) noexcept;
WorkloadProfile parse_profile(std::string_view name);

/// Joules per unit of each driver, per sampling interval.
struct EnergyCoefficients {
  double a_user = 0.5;
  double a_sys = 0.8;
  double a_ctx = 0.0005;
  double base = 8.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t duration_steps = 1000;
  EnergyCoefficients coeffs;
  double noise_std = 0.0;
  WorkloadProfile workload_profile = WorkloadProfile::bursty;
  double sampling_interval_s = 1.0;
  TimestampMs start_timestamp_ms = 1'700'000'000'000;
  NodeRole node = NodeRole::master();

  /// Throws Error(configuration).
  void validate() const;
};

/// Linear energy model in joules, before noise.
double model_energy_joules(const EnergyCoefficients &c,
                           const FeatureVector &fv) noexcept;

/// Deterministic function of the config.
Dataset simulate(const SynthConfig &config);

// ---------------------------------------------------------------------------
// Record store and JSON-lines persistence
// ---------------------------------------------------------------------------

/// Timestamp-keyed ordered store for one node. Single writer; readers take
/// snapshots. When a sink is attached every accepted sample is also written
/// as one JSON line.
class RecordStore {
public:
  RecordStore() = default;
  explicit RecordStore(std::ostream &sink) : sink_(&sink) {}

  /// Error(ordering) unless the timestamp is beyond the last stored one.
  void append(const Sample &sample);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  std::optional<TimestampMs> last_timestamp() const noexcept;

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  std::vector<Sample> snapshot() const;

private:
  std::map<TimestampMs, Sample> samples_;
  std::ostream *sink_ = nullptr;
};

void record(RecordStore &store, const Sample &sample);

std::string to_json_line(const Sample &sample);
Sample sample_from_json_line(std::string_view line);

/// Writes one line per row; missing values become null.
void write_jsonl(std::ostream &out, const Dataset &ds);
void write_jsonl(const std::filesystem::path &path, const Dataset &ds);
std::string to_jsonl(const Dataset &ds);

/// Reads a JSON-lines dataset. Null feature or target values are kept as
/// NaN for the cleaning step; ordering is enforced.
Dataset read_jsonl(std::istream &in, NodeRole node = NodeRole::master());
Dataset read_jsonl(const std::filesystem::path &path,
                   NodeRole node = NodeRole::master());

} // namespace nodewatt::collector

#endif // NODEWATT__COLLECTOR_HPP_
