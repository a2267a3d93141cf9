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

#ifndef NODEWATT__EVAL_HPP_
#define NODEWATT__EVAL_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nodewatt/dataset.hpp"
#include "nodewatt/model.hpp"

namespace nodewatt::eval {

double mse(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);

struct R2 {
  double value = 0.0;
  /// Constant actual series with nonzero residual; value is -infinity.
  bool undefined = false;
};

R2 r2(std::span<const double> actual, std::span<const double> predicted);

struct SeriesPoint {
  TimestampMs timestamp_ms;
  double actual_kwh;
  double predicted_kwh;
};

/// Metrics for one node. mse/mae/r2 are on the normalized target scale of
/// the model's scaler; mse_kwh is the same error in raw kWh.
struct EvalReport {
  NodeRole node = NodeRole::master();
  ModelKind model_kind = ModelKind::lstm;
  double mse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  bool r2_undefined = false;
  double mse_kwh = 0.0;
  std::size_t n_points = 0;
  std::vector<SeriesPoint> series;
  Scaler applied_scaler; // the scaler the inputs went through
};

struct EvalOptions {
  /// Refit the scaler on each evaluated node instead of reusing the
  /// model's. Off for transfer evaluation proper.
  bool per_node_rescale = false;
  Exec exec = Exec::parallel;
};

/// Scores `model` on a dataset whose columns equal the model's features.
/// Error(configuration) on any column mismatch.
EvalReport evaluate(const AnyModel &model, const Dataset &dataset,
                    const EvalOptions &opts = {});

/// One report per worker, each scored with the master-fitted scaler stored
/// in the model.
std::vector<EvalReport> transfer_eval(const AnyModel &model,
                                      std::span<const Dataset> workers,
                                      const EvalOptions &opts = {});

/// Fixed notation with 9 significant digits; "nan"/"inf" spelled out.
std::string format_sig9(double v);

std::string series_csv(const EvalReport &report);
std::string loss_history_csv(std::span<const LossPoint> history);

/// Two polylines (actual, predicted) over labelled axes.
std::string series_svg(const EvalReport &report, const std::string &title);

/// Writes the CSV, and `<path stem>.svg` next to it when with_svg is set.
void export_series(const EvalReport &report, const std::filesystem::path &path,
                   bool with_svg = false);
void export_loss_history(std::span<const LossPoint> history,
                         const std::filesystem::path &path);

} // namespace nodewatt::eval

#endif // NODEWATT__EVAL_HPP_
