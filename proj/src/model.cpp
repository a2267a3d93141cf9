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

#include "nodewatt/model.hpp"

#include "nodewatt/error.hpp"

namespace nodewatt {

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::lstm ? "lstm" : "gbt";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lstm") return ModelKind::lstm;
  if (name == "gbt") return ModelKind::gbt;
  fail(ErrorKind::configuration,
       "unknown model kind '" + std::string(name) + "' (expected lstm|gbt)");
}

ModelKind kind_of(const AnyModel &m) noexcept {
  return std::holds_alternative<lstm::LstmModel>(m) ? ModelKind::lstm
                                                    : ModelKind::gbt;
}

const std::vector<std::string> &feature_names_of(const AnyModel &m) noexcept {
  return std::visit(
      [](const auto &x) -> const std::vector<std::string> & {
        return x.feature_names;
      },
      m);
}

std::size_t window_len_of(const AnyModel &m) noexcept {
  return std::visit([](const auto &x) { return x.window_len; }, m);
}

const std::optional<Scaler> &scaler_of(const AnyModel &m) noexcept {
  return std::visit(
      [](const auto &x) -> const std::optional<Scaler> & { return x.scaler; },
      m);
}

std::vector<double> predict_windows(const AnyModel &m,
                                    const preprocess::WindowedSet &windows,
                                    Exec exec) {
  if (const auto *l = std::get_if<lstm::LstmModel>(&m)) {
    return lstm::predict_batch(l->params, windows, exec);
  }
  const auto &g = std::get<gbt::GbtModel>(m);
  const auto X = gbt::last_rows(windows);
  return gbt::predict_batch(g, {X, windows.size(), windows.n_features()}, exec);
}

double predict_window(const AnyModel &m, std::span<const double> window) {
  if (const auto *l = std::get_if<lstm::LstmModel>(&m)) {
    return lstm::predict_lstm(*l, window);
  }
  const auto &g = std::get<gbt::GbtModel>(m);
  const auto F = g.n_features;
  if (F == 0 || window.empty() || window.size() % F != 0) {
    fail(ErrorKind::shape, "window of " + std::to_string(window.size()) +
                               " values is not a whole number of " +
                               std::to_string(F) + "-feature rows");
  }
  if (window.size() / F != g.window_len) {
    fail(ErrorKind::shape, "window has " + std::to_string(window.size() / F) +
                               " rows, model expects " +
                               std::to_string(g.window_len));
  }
  return gbt::predict_gbt(g, window.subspan(window.size() - F));
}

} // namespace nodewatt
