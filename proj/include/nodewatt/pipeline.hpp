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

#ifndef NODEWATT__PIPELINE_HPP_
#define NODEWATT__PIPELINE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nodewatt/eval.hpp"
#include "nodewatt/model_file.hpp"

namespace nodewatt::app {

struct PipelineConfig {
  std::vector<std::string> features = preprocess::default_feature_names();
  double train_fraction = 0.8;
  std::size_t window_len = 16;
  double z_threshold = 3.0;
  bool clean = true;
  lstm::TrainConfig lstm;
  gbt::GbtConfig gbt;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct TrainOutcome {
  ModelFile file;
  /// Per epoch (LSTM) or per tree (GBT), normalized scale.
  std::vector<LossPoint> loss_history;
  double final_train_mse = 0.0;
  double final_val_mse = 0.0;
};

/// clean -> select -> split -> scale (train-fitted) -> window -> fit.
TrainOutcome train_model(ModelKind kind, const Dataset &raw,
                         const PipelineConfig &config);

/// Applies the training-time cleaning and column selection to `raw`, then
/// scores it with the model's own scaler.
eval::EvalReport evaluate_dataset(const ModelFile &file, const Dataset &raw,
                                  bool per_node_rescale = false,
                                  Exec exec = Exec::parallel);

} // namespace nodewatt::app

#endif // NODEWATT__PIPELINE_HPP_
