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

#ifndef NODEWATT__LSTM_HPP_
#define NODEWATT__LSTM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodewatt/dataset.hpp"
#include "nodewatt/exec.hpp"
#include "nodewatt/preprocess.hpp"

namespace nodewatt::lstm {

enum class Gate : std::size_t { input = 0, forget = 1, output = 2, candidate = 3 };
inline constexpr std::size_t kGates = 4;

/// All trainable parameters of a single-layer LSTM regressor in one flat
/// buffer:
///   W  [4H x F]  input weights, gate-major (input, forget, output, candidate)
///   U  [4H x H]  recurrent weights, same gate order
///   b  [4H]
///   w_out [H], b_out
/// Gradients use the same type.
class LstmParams {
public:
  LstmParams() = default;
  LstmParams(std::size_t n_features, std::size_t hidden_size);

  std::size_t n_features() const noexcept { return n_features_; }
  std::size_t hidden_size() const noexcept { return hidden_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Stacked [4H x F] / [4H x H] / [4H] blocks.
  std::span<double> W() noexcept { return block(w_off(), 4 * hidden_ * n_features_); }
  std::span<const double> W() const noexcept { return block(w_off(), 4 * hidden_ * n_features_); }
  std::span<double> U() noexcept { return block(u_off(), 4 * hidden_ * hidden_); }
  std::span<const double> U() const noexcept { return block(u_off(), 4 * hidden_ * hidden_); }
  std::span<double> b() noexcept { return block(b_off(), 4 * hidden_); }
  std::span<const double> b() const noexcept { return block(b_off(), 4 * hidden_); }

  /// Per-gate views.
  std::span<double> W(Gate g) noexcept { return W().subspan(gi(g) * hidden_ * n_features_, hidden_ * n_features_); }
  std::span<double> U(Gate g) noexcept { return U().subspan(gi(g) * hidden_ * hidden_, hidden_ * hidden_); }
  std::span<double> b(Gate g) noexcept { return b().subspan(gi(g) * hidden_, hidden_); }

  std::span<double> w_out() noexcept { return block(out_off(), hidden_); }
  std::span<const double> w_out() const noexcept { return block(out_off(), hidden_); }
  double &b_out() noexcept { return values_.back(); }
  double b_out() const noexcept { return values_.back(); }

  /// FNV-1a over the parameter bytes; used to detect stale caches.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const LstmParams &, const LstmParams &) = default;

private:
  static std::size_t gi(Gate g) noexcept { return static_cast<std::size_t>(g); }
  std::size_t w_off() const noexcept { return 0; }
  std::size_t u_off() const noexcept { return 4 * hidden_ * n_features_; }
  std::size_t b_off() const noexcept { return u_off() + 4 * hidden_ * hidden_; }
  std::size_t out_off() const noexcept { return b_off() + 4 * hidden_; }

  std::span<double> block(std::size_t off, std::size_t n) noexcept {
    return std::span<double>(values_).subspan(off, n);
  }
  std::span<const double> block(std::size_t off, std::size_t n) const noexcept {
    return std::span<const double>(values_).subspan(off, n);
  }

  std::size_t n_features_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> values_;
};

/// Activations saved by lstm_forward for the matching backward pass.
struct ForwardCache {
  std::size_t steps = 0;
  std::vector<double> window; // copy of the input, steps x F
  std::vector<double> gates;  // steps x 4H, activated (i, f, o, g)
  std::vector<double> c;      // (steps + 1) x H, c[0] = 0
  std::vector<double> h;      // (steps + 1) x H, h[0] = 0
  std::vector<double> tanh_c; // steps x H
  double prediction = 0.0;
  std::uint64_t params_fingerprint = 0;
};

struct ForwardResult {
  double prediction;
  ForwardCache cache;
};

/// Runs the cell over a flat [steps x F] window (normalized inputs).
ForwardResult lstm_forward(const LstmParams &params,
                           std::span<const double> window);

/// Prediction only, without keeping the cache.
double lstm_predict_normalized(const LstmParams &params,
                               std::span<const double> window);

/// Gradient of (prediction - target)^2. Error(contract) if `cache` was not
/// produced by lstm_forward on these params and this window.
LstmParams lstm_backward(const LstmParams &params,
                         std::span<const double> window, double target,
                         const ForwardCache &cache);

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  std::size_t hidden_size = 32;
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

using EpochLoss = LossPoint;

struct LstmModel {
  LstmParams params;
  std::vector<std::string> feature_names;
  std::size_t window_len = 0;
  std::optional<Scaler> scaler;
  TrainConfig config;
};

struct TrainResult {
  LstmModel model;
  std::vector<EpochLoss> loss_history;
};

/// Uniform(-1/sqrt(H), 1/sqrt(H)) initialization from the seed.
LstmParams init_params(std::size_t n_features, std::size_t hidden_size,
                       std::uint64_t seed);

/// Per-sample gradient descent in window order with global-norm clipping.
/// The per-epoch MSE evaluation uses `exec`; the updates are serial.
TrainResult train_lstm(const preprocess::WindowedSet &train,
                       const preprocess::WindowedSet &val,
                       const TrainConfig &config, Exec exec = Exec::parallel);

/// Normalized predictions for every window of `set`.
std::vector<double> predict_batch(const LstmParams &params,
                                  const preprocess::WindowedSet &set,
                                  Exec exec = Exec::parallel);

/// Raw-unit window [steps x F] in, kWh out, through the stored scaler.
double predict_lstm(const LstmModel &model, std::span<const double> window);

} // namespace nodewatt::lstm

#endif // NODEWATT__LSTM_HPP_
