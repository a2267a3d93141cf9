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

#include "nodewatt/collector.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nodewatt/error.hpp"
#include "nodewatt/rng.hpp"

namespace nodewatt::collector {

namespace {

using json = nlohmann::json;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) {
      ++j;
    }
    if (j > i) {
      out.push_back(line.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> to_double(std::string_view tok) {
  // mpstat honours LC_NUMERIC; accept a decimal comma.
  std::string s(tok);
  std::replace(s.begin(), s.end(), ',', '.');
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return v;
}

template <typename Int> std::optional<Int> to_int(std::string_view tok) {
  Int v{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    return std::nullopt;
  }
  return v;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string &what) {
  fail(ErrorKind::parse, "line " + std::to_string(line) + ": " + what);
}

/// Days since epoch for a banner date token, if it looks like one.
std::optional<std::int64_t> parse_date(std::string_view tok) {
  using namespace std::chrono;
  int y = 0, m = 0, d = 0;
  if (tok.size() == 10 && tok[4] == '-' && tok[7] == '-') { // YYYY-MM-DD
    auto yy = to_int<int>(tok.substr(0, 4));
    auto mm = to_int<int>(tok.substr(5, 2));
    auto dd = to_int<int>(tok.substr(8, 2));
    if (!yy || !mm || !dd) return std::nullopt;
    y = *yy, m = *mm, d = *dd;
  } else if ((tok.size() == 10 || tok.size() == 8) && tok[2] == '/' &&
             tok[5] == '/') { // MM/DD/YYYY or MM/DD/YY
    auto mm = to_int<int>(tok.substr(0, 2));
    auto dd = to_int<int>(tok.substr(3, 2));
    auto yy = to_int<int>(tok.substr(6));
    if (!yy || !mm || !dd) return std::nullopt;
    y = tok.size() == 8 ? 2000 + *yy : *yy;
    m = *mm, d = *dd;
  } else {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

/// Seconds of day from "HH:MM:SS" plus an optional AM/PM token.
std::optional<std::int64_t> parse_clock(std::string_view hms,
                                        std::string_view ampm) {
  if (hms.size() != 8 || hms[2] != ':' || hms[5] != ':') return std::nullopt;
  auto h = to_int<int>(hms.substr(0, 2));
  auto m = to_int<int>(hms.substr(3, 2));
  auto s = to_int<int>(hms.substr(6, 2));
  if (!h || !m || !s || *h > 23 || *m > 59 || *s > 60) return std::nullopt;
  int hour = *h;
  if (ampm == "AM" || ampm == "PM") {
    if (hour < 1 || hour > 12) return std::nullopt;
    hour %= 12;
    if (ampm == "PM") hour += 12;
  } else if (!ampm.empty()) {
    return std::nullopt;
  }
  return hour * 3600 + *m * 60 + *s;
}

struct Header {
  std::size_t cpu_col = 0;
  std::size_t n_tokens = 0;
  std::map<std::string, std::size_t, std::less<>> columns;
  std::size_t line = 0;
  bool saw_all = false;
};

double column(const Header &h, const std::vector<std::string_view> &toks,
              std::string_view name, std::size_t line, bool required) {
  auto it = h.columns.find(name);
  if (it == h.columns.end()) {
    if (required) {
      parse_fail(line, "report header lacks %" + std::string(name));
    }
    return 0.0;
  }
  auto v = to_double(toks[it->second]);
  if (!v) {
    parse_fail(line, "non-numeric %" + std::string(name) + " '" +
                         std::string(toks[it->second]) + "'");
  }
  if (!std::isfinite(*v) || *v < 0.0 || *v > 100.0) {
    parse_fail(line, "%" + std::string(name) + " out of range [0,100]: " +
                         std::string(toks[it->second]));
  }
  return *v;
}

} // namespace

std::vector<MpstatBlock> parse_mpstat_blocks(std::string_view text,
                                             const MpstatOptions &opts) {
  std::vector<MpstatBlock> blocks;
  std::optional<Header> header;
  std::int64_t day_ms = opts.base_date_ms;
  std::optional<std::int64_t> last_clock;
  std::vector<double> mhz;

  auto close_block = [&] {
    if (!blocks.empty() && !mhz.empty()) {
      double sum = 0.0;
      for (double v : mhz) sum += v;
      blocks.back().cpu_mhz = sum / static_cast<double>(mhz.size());
    }
    mhz.clear();
  };
  auto close_header = [&] {
    if (header && !header->saw_all) {
      fail(ErrorKind::missing_aggregate,
           "line " + std::to_string(header->line) +
               ": report has no \"all\" aggregate row");
    }
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto toks = split_ws(line);

    if (toks[0] == "Linux") {
      for (auto t : toks) {
        if (auto days = parse_date(t)) {
          day_ms = *days * 86'400'000LL;
          last_clock.reset();
        }
      }
      continue;
    }
    if (toks[0] == "Average:") continue;

    if (toks[0] == "ctxt") {
      if (blocks.empty()) parse_fail(line_no, "ctxt line before any report");
      auto v = toks.size() == 2 ? to_int<std::uint64_t>(toks[1]) : std::nullopt;
      if (!v) parse_fail(line_no, "malformed ctxt line");
      blocks.back().ctxt = *v;
      continue;
    }
    if (line.rfind("cpu MHz", 0) == 0) {
      if (blocks.empty()) parse_fail(line_no, "cpu MHz line before any report");
      const auto colon = line.find(':');
      auto v = colon == std::string_view::npos
                   ? std::nullopt
                   : to_double(trim(line.substr(colon + 1)));
      if (!v || !(*v > 0.0)) parse_fail(line_no, "malformed cpu MHz line");
      mhz.push_back(*v);
      continue;
    }

    const auto cpu_it = std::find(toks.begin(), toks.end(), "CPU");
    const bool is_header =
        cpu_it != toks.end() &&
        std::any_of(toks.begin(), toks.end(),
                    [](std::string_view t) { return t.starts_with('%'); });
    if (is_header) {
      close_header();
      Header h;
      h.cpu_col = static_cast<std::size_t>(cpu_it - toks.begin());
      h.n_tokens = toks.size();
      h.line = line_no;
      for (std::size_t i = h.cpu_col + 1; i < toks.size(); ++i) {
        std::string name(toks[i].substr(toks[i].starts_with('%') ? 1 : 0));
        if (name == "user") name = "usr";
        if (name == "system") name = "sys";
        h.columns.emplace(std::move(name), i);
      }
      header = std::move(h);
      continue;
    }

    if (!header || toks.size() <= header->cpu_col) continue;
    const auto cpu = toks[header->cpu_col];
    if (cpu != "all") {
      // Per-core rows are not used.
      continue;
    }
    if (toks.size() != header->n_tokens) {
      parse_fail(line_no, "aggregate row has " + std::to_string(toks.size()) +
                              " fields, header has " +
                              std::to_string(header->n_tokens));
    }
    const auto ampm = header->cpu_col >= 2 ? toks[1] : std::string_view{};
    const auto clock = parse_clock(toks[0], ampm);
    if (!clock) {
      parse_fail(line_no, "bad timestamp '" + std::string(toks[0]) + "'");
    }
    if (last_clock && *clock < *last_clock) {
      day_ms += 86'400'000LL; // midnight rollover
    }
    last_clock = *clock;

    close_block();
    MpstatBlock b;
    b.line = line_no;
    auto &r = b.all;
    r.timestamp_ms = day_ms + *clock * 1000;
    r.pct_usr = column(*header, toks, "usr", line_no, true);
    r.pct_nice = column(*header, toks, "nice", line_no, false);
    r.pct_sys = column(*header, toks, "sys", line_no, true);
    r.pct_iowait = column(*header, toks, "iowait", line_no, false);
    r.pct_irq = column(*header, toks, "irq", line_no, false);
    r.pct_soft = column(*header, toks, "soft", line_no, false);
    r.pct_steal = column(*header, toks, "steal", line_no, false);
    r.pct_guest = column(*header, toks, "guest", line_no, false);
    r.pct_gnice = column(*header, toks, "gnice", line_no, false);
    r.pct_idle = column(*header, toks, "idle", line_no, true);
    header->saw_all = true;
    blocks.push_back(b);
  }
  close_block();
  close_header();
  if (blocks.empty()) {
    fail(ErrorKind::missing_aggregate, "capture contains no \"all\" rows");
  }
  return blocks;
}

FeatureVector features_from_blocks(const MpstatBlock &prev,
                                   const MpstatBlock &curr,
                                   const MpstatOptions &opts) {
  const auto dt_ms = curr.all.timestamp_ms - prev.all.timestamp_ms;
  if (dt_ms <= 0) {
    fail(ErrorKind::ordering, "line " + std::to_string(curr.line) +
                                  ": report timestamps are not increasing");
  }
  double ctx_rate = 0.0;
  if (prev.ctxt && curr.ctxt) {
    if (*curr.ctxt < *prev.ctxt) {
      fail(ErrorKind::ordering, "line " + std::to_string(curr.line) +
                                    ": ctxt counter went backwards");
    }
    ctx_rate = static_cast<double>(*curr.ctxt - *prev.ctxt) /
               (static_cast<double>(dt_ms) / 1000.0);
  }
  FeatureVector::Fields f;
  f.timestamp_ms = curr.all.timestamp_ms;
  f.cpu_user = curr.all.pct_usr;
  f.cpu_system = curr.all.pct_sys;
  f.ctx_switches_per_sec = ctx_rate;
  f.irq_rate = curr.all.pct_irq + curr.all.pct_soft;
  f.cpu_freq_mhz = curr.cpu_mhz.value_or(opts.default_freq_mhz);
  f.idle_pct = curr.all.pct_idle;
  return FeatureVector(f);
}

FeatureVector parse_mpstat_interval(std::string_view text,
                                    const MpstatOptions &opts) {
  const auto blocks = parse_mpstat_blocks(text, opts);
  if (blocks.size() < 2) {
    fail(ErrorKind::missing_aggregate,
         "an interval needs two report blocks, found " +
             std::to_string(blocks.size()));
  }
  return features_from_blocks(blocks[0], blocks[1], opts);
}

std::uint64_t parse_counter_value(std::string_view text) {
  const auto body = trim(text);
  if (body.empty()) {
    fail(ErrorKind::parse, "empty energy counter");
  }
  auto v = to_int<std::uint64_t>(body);
  if (!v) {
    fail(ErrorKind::parse,
         "energy counter is not an integer: '" + std::string(body) + "'");
  }
  return *v;
}

namespace {

std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::io, "cannot read " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) {
    fail(ErrorKind::io, "error reading " + path.string());
  }
  return ss.str();
}

} // namespace

EnergyReading read_energy_counter(const std::filesystem::path &value_file,
                                  const std::filesystem::path &max_range_file) {
  const auto value = parse_counter_value(slurp(value_file));
  const auto max_range = parse_counter_value(slurp(max_range_file));
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  return EnergyReading::make(now, value, max_range);
}

EnergyReading read_energy_counter(const std::filesystem::path &rapl_dir) {
  return read_energy_counter(rapl_dir / "energy_uj",
                             rapl_dir / "max_energy_range_uj");
}

std::vector<EnergyReading> parse_energy_log(std::string_view text,
                                            std::uint64_t max_range_uj) {
  std::vector<EnergyReading> out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto toks = split_ws(t);
    auto ts = toks.size() == 2 ? to_int<TimestampMs>(toks[0]) : std::nullopt;
    auto uj = toks.size() == 2 ? to_int<std::uint64_t>(toks[1]) : std::nullopt;
    if (!ts || !uj) {
      parse_fail(line_no, "expected '<timestamp_ms> <cumulative_uj>'");
    }
    out.push_back(EnergyReading::make(*ts, *uj, max_range_uj));
  }
  return out;
}

std::vector<Sample> assemble_samples(std::span<const MpstatBlock> blocks,
                                     std::span<const EnergyReading> readings,
                                     const MpstatOptions &opts) {
  if (blocks.size() != readings.size()) {
    fail(ErrorKind::configuration,
         std::to_string(blocks.size()) + " reports but " +
             std::to_string(readings.size()) + " energy readings");
  }
  std::vector<Sample> out;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const auto fv = features_from_blocks(blocks[i - 1], blocks[i], opts);
    const auto uj = counter_delta(readings[i - 1], readings[i]);
    out.emplace_back(fv, joules_to_kwh(microjoules_to_joules(uj)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

std::string_view to_string(WorkloadProfile p) noexcept {
  switch (p) {
  case WorkloadProfile::idle: return "idle";
  case WorkloadProfile::ramp: return "ramp";
  case WorkloadProfile::bursty: return "bursty";
  case WorkloadProfile::diurnal: return "diurnal";
  case WorkloadProfile::steady: return "steady";
  }
  return "unknown";
}

WorkloadProfile parse_profile(std::string_view name) {
  for (auto p : {WorkloadProfile::idle, WorkloadProfile::ramp,
                 WorkloadProfile::bursty, WorkloadProfile::diurnal,
                 WorkloadProfile::steady}) {
    if (to_string(p) == name) return p;
  }
  fail(ErrorKind::configuration,
       "unknown workload profile '" + std::string(name) + "'");
}

void SynthConfig::validate() const {
  if (duration_steps < 2) {
    fail(ErrorKind::configuration, "duration_steps must be >= 2");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    fail(ErrorKind::configuration, "noise_std must be finite and >= 0");
  }
  for (double c : {coeffs.a_user, coeffs.a_sys, coeffs.a_ctx, coeffs.base}) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      fail(ErrorKind::configuration,
           "energy coefficients must be finite and >= 0");
    }
  }
  if (!(sampling_interval_s > 0.0) || !std::isfinite(sampling_interval_s)) {
    fail(ErrorKind::configuration, "sampling_interval_s must be positive");
  }
}

double model_energy_joules(const EnergyCoefficients &c,
                           const FeatureVector &fv) noexcept {
  return c.base + c.a_user * fv.cpu_user() + c.a_sys * fv.cpu_system() +
         c.a_ctx * fv.ctx_switches_per_sec();
}

namespace {

/// Latent load trajectory in [0, 1] driving every feature.
class LoadGenerator {
public:
  LoadGenerator(WorkloadProfile profile, std::size_t steps, Rng &rng)
      : profile_(profile), steps_(steps), rng_(rng) {}

  double next(std::size_t t) {
    switch (profile_) {
    case WorkloadProfile::idle:
    case WorkloadProfile::steady:
      return 0.0;
    case WorkloadProfile::ramp:
      return 0.05 + 0.85 * static_cast<double>(t) /
                        static_cast<double>(steps_ - 1) +
             rng_.normal(0.0, 0.01);
    case WorkloadProfile::diurnal: {
      ar_ = 0.9 * ar_ + rng_.normal(0.0, 0.004);
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) /
                           kDiurnalPeriod;
      return 0.45 + 0.35 * std::sin(phase) + ar_;
    }
    case WorkloadProfile::bursty:
      return bursty();
    }
    return 0.0;
  }

private:
  static constexpr double kDiurnalPeriod = 200.0;

  // AR(1) background plus triangular bursts: rise over k steps, fall over k.
  double bursty() {
    background_ = 0.12 + 0.85 * (background_ - 0.12) + rng_.normal(0.0, 0.02);
    background_ = std::clamp(background_, 0.02, 0.3);
    if (burst_left_ == 0 && rng_.uniform() < 0.06) {
      burst_half_ = 5 + static_cast<int>(rng_.uniform() * 4.0);
      burst_left_ = 2 * burst_half_;
      burst_height_ = rng_.uniform(0.35, 0.7);
    }
    double shape = 0.0;
    if (burst_left_ > 0) {
      const int p = 2 * burst_half_ - burst_left_;
      shape = p < burst_half_
                  ? static_cast<double>(p + 1) / burst_half_
                  : static_cast<double>(2 * burst_half_ - 1 - p) / burst_half_;
      --burst_left_;
    }
    return background_ + burst_height_ * shape;
  }

  WorkloadProfile profile_;
  std::size_t steps_;
  Rng &rng_;
  double ar_ = 0.0;
  double background_ = 0.12;
  int burst_half_ = 0;
  int burst_left_ = 0;
  double burst_height_ = 0.0;
};

// Per-step measurement jitter relative to the busy profiles. The diurnal
// cycle is smooth so its trajectory stays forecastable.
double jitter_scale(WorkloadProfile profile) noexcept {
  return profile == WorkloadProfile::diurnal ? 0.2 : 1.0;
}

FeatureVector::Fields synth_features(WorkloadProfile profile, double load,
                                     Rng &rng) {
  FeatureVector::Fields f;
  if (profile == WorkloadProfile::steady) {
    f.cpu_user = 50.0;
    f.cpu_system = 10.0;
    f.ctx_switches_per_sec = 1000.0;
    f.irq_rate = 1.0;
    f.cpu_freq_mhz = 2400.0;
    f.idle_pct = 40.0;
    return f;
  }
  if (profile == WorkloadProfile::idle) {
    f.cpu_user = std::clamp(1.5 + std::abs(rng.normal(0.0, 0.8)), 0.0, 5.0);
    f.cpu_system = std::clamp(0.5 + std::abs(rng.normal(0.0, 0.3)), 0.0, 3.0);
    f.ctx_switches_per_sec = std::max(0.0, 300.0 + rng.normal(0.0, 30.0));
    f.irq_rate = std::max(0.0, 0.1 + rng.normal(0.0, 0.02));
    f.cpu_freq_mhz = std::max(400.0, 800.0 + rng.normal(0.0, 20.0));
  } else {
    const double j = jitter_scale(profile);
    load = std::clamp(load, 0.0, 1.0);
    f.cpu_user =
        std::clamp(80.0 * load + rng.normal(0.0, 1.0 * j), 0.0, 85.0);
    f.cpu_system =
        std::clamp(1.0 + 12.0 * load + rng.normal(0.0, 0.5 * j), 0.0, 14.0);
    f.ctx_switches_per_sec =
        std::max(0.0, 400.0 + 25000.0 * load + rng.normal(0.0, 300.0 * j));
    f.irq_rate =
        std::max(0.0, 0.2 + 2.5 * load + rng.normal(0.0, 0.05 * j));
    f.cpu_freq_mhz = std::max(
        400.0, 1200.0 + 2200.0 * std::min(1.0, 1.4 * load) +
                   rng.normal(0.0, 20.0 * j));
  }
  const double iowait = rng.uniform(0.0, 1.0);
  f.idle_pct = std::clamp(100.0 - f.cpu_user - f.cpu_system - iowait, 0.0,
                          100.0);
  return f;
}

} // namespace

Dataset simulate(const SynthConfig &config) {
  config.validate();
  Rng workload_rng(config.seed);
  Rng noise_rng(config.seed ^ 0x6a09e667f3bcc909ULL);
  LoadGenerator load(config.workload_profile, config.duration_steps,
                     workload_rng);

  const auto step_ms =
      static_cast<TimestampMs>(std::llround(config.sampling_interval_s * 1000.0));
  if (step_ms <= 0) {
    fail(ErrorKind::configuration, "sampling interval below 1 ms");
  }

  std::vector<Sample> samples;
  samples.reserve(config.duration_steps);
  for (std::size_t t = 0; t < config.duration_steps; ++t) {
    auto fields = synth_features(config.workload_profile, load.next(t),
                                 workload_rng);
    fields.timestamp_ms =
        config.start_timestamp_ms + static_cast<TimestampMs>(t) * step_ms;
    const FeatureVector fv(fields);
    double joules = model_energy_joules(config.coeffs, fv);
    if (config.noise_std > 0.0) {
      joules += noise_rng.normal(0.0, config.noise_std);
    }
    samples.emplace_back(fv, joules_to_kwh(std::max(0.0, joules)));
  }
  return Dataset::from_samples(config.node, samples);
}

// ---------------------------------------------------------------------------
// Store and JSON lines
// ---------------------------------------------------------------------------

void RecordStore::append(const Sample &sample) {
  if (!samples_.empty() && sample.timestamp_ms() <= samples_.rbegin()->first) {
    fail(ErrorKind::ordering,
         "sample timestamp " + std::to_string(sample.timestamp_ms()) +
             " is not after " + std::to_string(samples_.rbegin()->first));
  }
  samples_.emplace_hint(samples_.end(), sample.timestamp_ms(), sample);
  if (sink_ != nullptr) {
    *sink_ << to_json_line(sample) << '\n';
    if (!*sink_) {
      fail(ErrorKind::io, "failed to persist sample");
    }
  }
}

std::optional<TimestampMs> RecordStore::last_timestamp() const noexcept {
  if (samples_.empty()) return std::nullopt;
  return samples_.rbegin()->first;
}

std::vector<Sample> RecordStore::snapshot() const {
  std::vector<Sample> out;
  out.reserve(samples_.size());
  for (const auto &[ts, s] : samples_) out.push_back(s);
  return out;
}

void record(RecordStore &store, const Sample &sample) { store.append(sample); }

namespace {

json row_json(TimestampMs ts, std::span<const double> values,
              std::span<const std::size_t> column, double target) {
  json features = json::object();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    features[std::string(kFeatureNames[c])] = values[column[c]];
  }
  features["timestamp_ms"] = ts;
  return json{{"energy_kwh", target}, {"features", std::move(features)}};
}

double number_or_nan(const json &obj, const std::string &key, std::size_t line,
                     bool allow_null) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    parse_fail(line, "missing field '" + key + "'");
  }
  if (it->is_null()) {
    if (!allow_null) parse_fail(line, "field '" + key + "' is null");
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (!it->is_number()) {
    parse_fail(line, "field '" + key + "' is not a number");
  }
  return it->get<double>();
}

struct ParsedRow {
  TimestampMs ts;
  std::array<double, kFeatureCount> values;
  double target;
};

ParsedRow parse_row(std::string_view text, std::size_t line, bool allow_null) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    parse_fail(line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("features") || !j["features"].is_object()) {
    parse_fail(line, "record lacks a 'features' object");
  }
  const auto &f = j["features"];
  const auto ts_it = f.find("timestamp_ms");
  if (ts_it == f.end() || !ts_it->is_number_integer()) {
    parse_fail(line, "timestamp_ms must be an integer");
  }
  ParsedRow row{};
  row.ts = ts_it->get<TimestampMs>();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    row.values[c] = number_or_nan(f, std::string(kFeatureNames[c]), line,
                                  allow_null);
  }
  row.target = number_or_nan(j, "energy_kwh", line, allow_null);
  return row;
}

} // namespace

std::string to_json_line(const Sample &sample) {
  constexpr std::array<std::size_t, kFeatureCount> identity{0, 1, 2, 3, 4, 5};
  const auto values = sample.features().values();
  return row_json(sample.timestamp_ms(), values, identity, sample.energy_kwh())
      .dump();
}

Sample sample_from_json_line(std::string_view line) {
  const auto row = parse_row(line, 1, false);
  FeatureVector::Fields f;
  f.timestamp_ms = row.ts;
  f.cpu_user = row.values[0];
  f.cpu_system = row.values[1];
  f.ctx_switches_per_sec = row.values[2];
  f.irq_rate = row.values[3];
  f.cpu_freq_mhz = row.values[4];
  f.idle_pct = row.values[5];
  return Sample(FeatureVector(f), row.target);
}

void write_jsonl(std::ostream &out, const Dataset &ds) {
  std::array<std::size_t, kFeatureCount> column{};
  if (ds.n_features() != kFeatureCount) {
    fail(ErrorKind::configuration,
         "only full-feature datasets are written as JSON lines");
  }
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    const auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                              kFeatureNames[c]);
    if (it == ds.feature_names.end()) {
      fail(ErrorKind::configuration,
           "dataset lacks column " + std::string(kFeatureNames[c]));
    }
    column[c] = static_cast<std::size_t>(it - ds.feature_names.begin());
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << row_json(ds.timestamps_ms[i], ds.row(i), column, ds.targets_kwh[i])
               .dump()
        << '\n';
  }
}

std::string to_jsonl(const Dataset &ds) {
  std::ostringstream ss;
  write_jsonl(ss, ds);
  return ss.str();
}

void write_jsonl(const std::filesystem::path &path, const Dataset &ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  }
  write_jsonl(out, ds);
  out.flush();
  if (!out) {
    fail(ErrorKind::io, "failed writing " + path.string());
  }
}

Dataset read_jsonl(std::istream &in, NodeRole node) {
  Dataset ds;
  ds.node = node;
  ds.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto row = parse_row(line, line_no, true);
    if (!ds.empty() && row.ts <= ds.timestamps_ms.back()) {
      fail(ErrorKind::ordering, "line " + std::to_string(line_no) +
                                    ": timestamp not after previous record");
    }
    ds.push_back(row.ts, row.values, row.target);
  }
  if (in.bad()) {
    fail(ErrorKind::io, "error reading dataset stream");
  }
  return ds;
}

Dataset read_jsonl(const std::filesystem::path &path, NodeRole node) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorKind::io, "cannot read " + path.string());
  }
  return read_jsonl(in, node);
}

} // namespace nodewatt::collector
