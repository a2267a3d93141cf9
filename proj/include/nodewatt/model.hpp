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

#ifndef NODEWATT__MODEL_HPP_
#define NODEWATT__MODEL_HPP_

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nodewatt/exec.hpp"
#include "nodewatt/gbt.hpp"
#include "nodewatt/lstm.hpp"
#include "nodewatt/preprocess.hpp"

namespace nodewatt {

enum class ModelKind { lstm, gbt };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

/// Either trained regressor, with its feature layout and scaler.
using AnyModel = std::variant<lstm::LstmModel, gbt::GbtModel>;

ModelKind kind_of(const AnyModel &m) noexcept;
const std::vector<std::string> &feature_names_of(const AnyModel &m) noexcept;
std::size_t window_len_of(const AnyModel &m) noexcept;
const std::optional<Scaler> &scaler_of(const AnyModel &m) noexcept;

/// Normalized predictions for every window (GBT uses each window's last row).
std::vector<double> predict_windows(const AnyModel &m,
                                    const preprocess::WindowedSet &windows,
                                    Exec exec = Exec::parallel);

/// Raw-unit [rows x F] window in, kWh out.
double predict_window(const AnyModel &m, std::span<const double> window);

} // namespace nodewatt

#endif // NODEWATT__MODEL_HPP_
