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

#include "nodewatt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "nodewatt/error.hpp"

namespace nodewatt::eval {

namespace {

void check_pair(std::span<const double> a, std::span<const double> p) {
  if (a.size() != p.size()) {
    fail(ErrorKind::shape, "actual has " + std::to_string(a.size()) +
                               " points, predicted has " +
                               std::to_string(p.size()));
  }
  if (a.empty()) {
    fail(ErrorKind::shape, "metrics need at least one point");
  }
}

} // namespace

double mse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = actual[i] - predicted[i];
    s += d * d;
  }
  return s / static_cast<double>(actual.size());
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    s += std::abs(actual[i] - predicted[i]);
  }
  return s / static_cast<double>(actual.size());
}

R2 r2(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted);
  double mean = 0.0;
  for (double v : actual) mean += v;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) {
    if (ss_res == 0.0) return {1.0, false};
    return {-std::numeric_limits<double>::infinity(), true};
  }
  return {1.0 - ss_res / ss_tot, false};
}

namespace {

Scaler identity_scaler(const std::vector<std::string> &names) {
  Scaler s;
  s.feature_names = names;
  s.features.assign(names.size(), MinMax{0.0, 1.0});
  s.target = MinMax{0.0, 1.0};
  return s;
}

} // namespace

EvalReport evaluate(const AnyModel &model, const Dataset &dataset,
                    const EvalOptions &opts) {
  const auto &names = feature_names_of(model);
  if (dataset.feature_names != names) {
    std::string got, want;
    for (const auto &n : dataset.feature_names) got += (got.empty() ? "" : ",") + n;
    for (const auto &n : names) want += (want.empty() ? "" : ",") + n;
    fail(ErrorKind::configuration, "node " + dataset.node.to_string() +
                                       " has features [" + got +
                                       "], model expects [" + want + "]");
  }

  const auto &model_scaler = scaler_of(model);
  Scaler scaler;
  Dataset raw = dataset;
  if (dataset.scaler) {
    // Already normalized upstream: it must have been with the model's scaler.
    if (opts.per_node_rescale || dataset.scaler != model_scaler) {
      fail(ErrorKind::configuration,
           "dataset was normalized with a scaler other than the model's");
    }
    scaler = *dataset.scaler;
    raw.scaler.reset();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto r = raw.row(i);
      for (std::size_t j = 0; j < raw.n_features(); ++j) {
        r[j] = scaler.features[j].invert(r[j]);
      }
      raw.targets_kwh[i] = scaler.target.invert(raw.targets_kwh[i]);
    }
  } else if (opts.per_node_rescale) {
    scaler = preprocess::fit_scaler(dataset);
  } else {
    scaler = model_scaler ? *model_scaler : identity_scaler(names);
  }

  const auto normalized = preprocess::apply_scaler(scaler, raw);
  const auto windows = preprocess::make_windows(normalized, window_len_of(model));
  const auto pred = predict_windows(model, windows, opts.exec);

  EvalReport rep;
  rep.node = dataset.node;
  rep.model_kind = kind_of(model);
  rep.applied_scaler = scaler;
  rep.n_points = windows.size();
  rep.mse = mse(windows.targets, pred);
  rep.mae = mae(windows.targets, pred);
  const auto r = r2(windows.targets, pred);
  rep.r2 = r.value;
  rep.r2_undefined = r.undefined;

  const auto W = windows.window_len;
  double sq = 0.0;
  rep.series.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const double actual = raw.targets_kwh[W + i];
    const double predicted = scaler.target.invert(pred[i]);
    sq += (actual - predicted) * (actual - predicted);
    rep.series.push_back({windows.target_timestamps[i], actual, predicted});
  }
  rep.mse_kwh = sq / static_cast<double>(windows.size());
  return rep;
}

std::vector<EvalReport> transfer_eval(const AnyModel &model,
                                      std::span<const Dataset> workers,
                                      const EvalOptions &opts) {
  std::vector<EvalReport> reports;
  reports.reserve(workers.size());
  for (const auto &w : workers) {
    reports.push_back(evaluate(model, w, opts));
  }
  return reports;
}

std::string format_sig9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  const char *e = std::strchr(buf, 'e');
  const int exponent = e ? std::atoi(e + 1) : 0;
  const int decimals = std::max(0, 8 - exponent);
  std::vector<char> out(static_cast<std::size_t>(decimals) + 400);
  std::snprintf(out.data(), out.size(), "%.*f", decimals, v);
  return out.data();
}

namespace {

std::string format_timestamp(TimestampMs ts) {
  const bool neg = ts < 0;
  const auto a = neg ? -ts : ts;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", neg ? "-" : "",
                static_cast<long long>(a / 1000),
                static_cast<long long>(a % 1000));
  return buf;
}

void write_file(const std::filesystem::path &path, const std::string &body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  }
  out << body;
  out.flush();
  if (!out) {
    fail(ErrorKind::io, "failed writing " + path.string());
  }
}

} // namespace

std::string series_csv(const EvalReport &report) {
  std::string out = "timestamp,actual_kwh,predicted_kwh\n";
  for (const auto &p : report.series) {
    out += format_timestamp(p.timestamp_ms);
    out += ',';
    out += format_sig9(p.actual_kwh);
    out += ',';
    out += format_sig9(p.predicted_kwh);
    out += '\n';
  }
  return out;
}

std::string loss_history_csv(std::span<const LossPoint> history) {
  std::string out = "epoch,train_mse,val_mse\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_sig9(history[i].train_mse);
    out += ',';
    out += format_sig9(history[i].val_mse);
    out += '\n';
  }
  return out;
}

std::string series_svg(const EvalReport &report, const std::string &title) {
  constexpr double width = 900.0, height = 360.0;
  constexpr double left = 70.0, right = 20.0, top = 40.0, bottom = 40.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto &p : report.series) {
    lo = std::min({lo, p.actual_kwh, p.predicted_kwh});
    hi = std::max({hi, p.actual_kwh, p.predicted_kwh});
  }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
    hi = lo + 2.0;
  }
  const auto n = report.series.size();
  auto x_at = [&](std::size_t i) {
    return left + (n > 1 ? plot_w * static_cast<double>(i) /
                               static_cast<double>(n - 1)
                         : 0.0);
  };
  auto y_at = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  auto polyline = [&](bool actual, const char *colour) {
    std::string pts;
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
      const auto &p = report.series[i];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", x_at(i),
                    y_at(actual ? p.actual_kwh : p.predicted_kwh));
      pts += buf;
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
           "\" stroke-width=\"1.2\" points=\"" + pts + "\"/>\n";
  };

  std::ostringstream svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                "width=\"%.0f\" height=\"%.0f\">\n",
                width, height);
  svg << buf;
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" "
      << "font-size=\"14\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" "
                "stroke=\"black\"/>\n<line x1=\"%.0f\" y1=\"%.0f\" "
                "x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n",
                left, top, left, top + plot_h, left, top + plot_h,
                left + plot_w, top + plot_h);
  svg << buf;
  svg << "<text x=\"4\" y=\"" << top + 10 << "\" font-family=\"sans-serif\" "
      << "font-size=\"10\">" << format_sig9(hi) << "</text>\n";
  svg << "<text x=\"4\" y=\"" << top + plot_h << "\" font-family=\"sans-serif\" "
      << "font-size=\"10\">" << format_sig9(lo) << "</text>\n";
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" font-family=\"sans-serif\" font-size=\"11\">interval (kWh per "
         "step)</text>\n";
  svg << polyline(true, "#1f77b4") << polyline(false, "#d62728");
  svg << "<text x=\"" << left + plot_w - 160 << "\" y=\"24\" fill=\"#1f77b4\" "
      << "font-family=\"sans-serif\" font-size=\"11\">actual</text>\n";
  svg << "<text x=\"" << left + plot_w - 90 << "\" y=\"24\" fill=\"#d62728\" "
      << "font-family=\"sans-serif\" font-size=\"11\">predicted</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void export_series(const EvalReport &report, const std::filesystem::path &path,
                   bool with_svg) {
  write_file(path, series_csv(report));
  if (with_svg) {
    auto svg_path = path;
    svg_path.replace_extension(".svg");
    const auto title = "Actual vs predicted, " +
                       std::string(to_string(report.model_kind)) + " on " +
                       report.node.to_string();
    write_file(svg_path, series_svg(report, title));
  }
}

void export_loss_history(std::span<const LossPoint> history,
                         const std::filesystem::path &path) {
  write_file(path, loss_history_csv(history));
}

} // namespace nodewatt::eval
