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

#include "nodewatt/pipeline.hpp"

#include <cmath>

#include "nodewatt/collector.hpp"
#include "nodewatt/error.hpp"

namespace nodewatt::app {

void PipelineConfig::validate() const {
  if (features.empty()) fail(ErrorKind::configuration, "no features selected");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::configuration, "train fraction must lie in (0, 1)");
  }
  if (window_len == 0) fail(ErrorKind::configuration, "window length must be positive");
  if (!(z_threshold > 0.0)) fail(ErrorKind::configuration, "z threshold must be positive");
  lstm.validate();
  gbt.validate();
}

namespace {

Dataset prepare(const Dataset &raw, const std::vector<std::string> &features,
                bool do_clean, double z) {
  const auto cleaned = do_clean ? preprocess::clean(raw, z) : raw;
  return preprocess::select_features(cleaned, features);
}

} // namespace

TrainOutcome train_model(ModelKind kind, const Dataset &raw,
                         const PipelineConfig &config) {
  config.validate();
  const auto cleaned = config.clean ? preprocess::clean(raw, config.z_threshold) : raw;
  const auto fingerprint = fingerprint_hex(collector::to_jsonl(cleaned));
  const auto selected = preprocess::select_features(cleaned, config.features);

  auto [train_raw, val_raw] = preprocess::split_chronological(selected, config.train_fraction);
  const auto scaler = preprocess::fit_scaler(train_raw);
  const auto train_ds = preprocess::apply_scaler(scaler, train_raw);
  const auto val_ds = preprocess::apply_scaler(scaler, val_raw);

  const auto W = config.window_len;
  const auto train_w = preprocess::make_windows(train_ds, W);
  preprocess::WindowedSet val_w;
  if (val_ds.size() > W) {
    val_w = preprocess::make_windows(val_ds, W);
  } else {
    val_w.window_len = W;
    val_w.feature_names = val_ds.feature_names;
    val_w.scaler = scaler;
  }

  TrainOutcome out;
  TrainingMetadata &meta = out.file.metadata;
  if (kind == ModelKind::lstm) {
    auto res = lstm::train_lstm(train_w, val_w, config.lstm, config.exec);
    res.model.scaler = scaler;
    out.loss_history = std::move(res.loss_history);
    out.file.model = std::move(res.model);
    meta.seed = config.lstm.seed;
    meta.iterations = config.lstm.epochs;
  } else {
    auto fit = gbt::fit_gbt_windows(train_w, val_w, config.gbt, config.exec);
    fit.model.scaler = scaler;
    fit.model.feature_names = config.features;
    fit.model.window_len = W;
    out.loss_history.assign(fit.stage_loss.begin() + 1, fit.stage_loss.end());
    if (out.loss_history.empty()) out.loss_history.push_back(fit.stage_loss.front());
    out.file.model = std::move(fit.model);
    meta.seed = 0;
    meta.iterations = config.gbt.n_estimators;
  }
  out.final_train_mse = out.loss_history.back().train_mse;
  out.final_val_mse = out.loss_history.back().val_mse;

  meta.data_fingerprint = fingerprint;
  meta.created_at = reproducible_timestamp();
  meta.node = raw.node.to_string();
  meta.train_fraction = config.train_fraction;
  meta.z_threshold = config.z_threshold;
  meta.cleaned = config.clean;
  meta.n_train = train_w.size();
  meta.n_val = val_w.size();
  meta.final_train_mse = out.final_train_mse;
  meta.final_val_mse = out.final_val_mse;
  meta.loss_history = out.loss_history;
  return out;
}

eval::EvalReport evaluate_dataset(const ModelFile &file, const Dataset &raw,
                                  bool per_node_rescale, Exec exec) {
  const auto &md = file.metadata;
  const auto ds = prepare(raw, feature_names_of(file.model), md.cleaned, md.z_threshold);
  return eval::evaluate(file.model, ds, {per_node_rescale, exec});
}

} // namespace nodewatt::app
