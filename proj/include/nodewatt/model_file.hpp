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

#ifndef NODEWATT__MODEL_FILE_HPP_
#define NODEWATT__MODEL_FILE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nodewatt/model.hpp"

namespace nodewatt::app {

inline constexpr int kFormatVersion = 1;

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t iterations = 0; // epochs (LSTM) or estimators (GBT)
  std::string data_fingerprint;
  std::string created_at;
  std::string node = "master";
  double train_fraction = 0.8;
  double z_threshold = 3.0;
  bool cleaned = true;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  double final_train_mse = 0.0;
  double final_val_mse = 0.0;
  std::vector<LossPoint> loss_history;
};

struct ModelFile {
  int format_version = kFormatVersion;
  AnyModel model;
  TrainingMetadata metadata;
};

nlohmann::json to_json(const ModelFile &file);
nlohmann::json metadata_json(const TrainingMetadata &meta);

/// Validates every field; Error(schema) or Error(unsupported_version).
ModelFile model_from_json(const nlohmann::json &j);

/// Canonical text: sorted keys, shortest round-trip floats, trailing LF.
std::string serialize_model(const ModelFile &file);
ModelFile parse_model(std::string_view text);

void save_model(const ModelFile &file, const std::filesystem::path &path);
ModelFile load_model(const std::filesystem::path &path);

/// FNV-1a 64 as 16 lowercase hex digits.
std::string fingerprint_hex(std::string_view bytes);

/// ISO-8601 UTC from SOURCE_DATE_EPOCH, or the epoch when unset.
std::string reproducible_timestamp();

} // namespace nodewatt::app

#endif // NODEWATT__MODEL_FILE_HPP_
