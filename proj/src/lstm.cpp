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

#include "nodewatt/lstm.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>

#include "nodewatt/error.hpp"
#include "nodewatt/rng.hpp"

namespace nodewatt::lstm {

LstmParams::LstmParams(std::size_t n_features, std::size_t hidden_size)
    : n_features_(n_features), hidden_(hidden_size) {
  if (n_features == 0 || hidden_size == 0) {
    fail(ErrorKind::shape, "LSTM needs at least one feature and one unit");
  }
  values_.assign(4 * hidden_ * (n_features_ + hidden_ + 1) + hidden_ + 1, 0.0);
}

std::uint64_t LstmParams::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values_) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h ^ (n_features_ << 32) ^ hidden_;
}

namespace {

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t steps_of(const LstmParams &p, std::span<const double> window) {
  const auto f = p.n_features();
  if (window.empty() || window.size() % f != 0) {
    fail(ErrorKind::shape, "window of " + std::to_string(window.size()) +
                               " values is not a whole number of " +
                               std::to_string(f) + "-feature rows");
  }
  return window.size() / f;
}

/// z = W x + U h_prev + b for all four gates, activated in place.
void gate_step(const LstmParams &p, const double *x, const double *h_prev,
               double *z) {
  const auto H = p.hidden_size();
  const auto F = p.n_features();
  const double *W = p.W().data();
  const double *U = p.U().data();
  const double *b = p.b().data();
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = b[r];
    const double *wr = W + r * F;
    for (std::size_t k = 0; k < F; ++k) acc += wr[k] * x[k];
    const double *ur = U + r * H;
    for (std::size_t k = 0; k < H; ++k) acc += ur[k] * h_prev[k];
    z[r] = acc;
  }
  for (std::size_t r = 0; r < 3 * H; ++r) z[r] = sigmoid(z[r]);
  for (std::size_t r = 3 * H; r < 4 * H; ++r) z[r] = std::tanh(z[r]);
}

[[noreturn]] void non_finite(std::size_t step) {
  fail(ErrorKind::numeric,
       "non-finite LSTM state at step " + std::to_string(step));
}

ForwardResult forward_impl(const LstmParams &params,
                           std::span<const double> window, bool stamp) {
  const auto T = steps_of(params, window);
  const auto H = params.hidden_size();
  const auto F = params.n_features();

  ForwardResult res{0.0, {}};
  auto &cache = res.cache;
  cache.steps = T;
  cache.window.assign(window.begin(), window.end());
  cache.gates.assign(T * 4 * H, 0.0);
  cache.c.assign((T + 1) * H, 0.0);
  cache.h.assign((T + 1) * H, 0.0);
  cache.tanh_c.assign(T * H, 0.0);

  for (std::size_t t = 0; t < T; ++t) {
    double *z = cache.gates.data() + t * 4 * H;
    gate_step(params, window.data() + t * F, cache.h.data() + t * H, z);
    const double *c_prev = cache.c.data() + t * H;
    double *c = cache.c.data() + (t + 1) * H;
    double *h = cache.h.data() + (t + 1) * H;
    double *tc = cache.tanh_c.data() + t * H;
    for (std::size_t j = 0; j < H; ++j) {
      const double i = z[j], f = z[H + j], o = z[2 * H + j], g = z[3 * H + j];
      c[j] = f * c_prev[j] + i * g;
      tc[j] = std::tanh(c[j]);
      h[j] = o * tc[j];
      if (!std::isfinite(c[j]) || !std::isfinite(h[j])) non_finite(t);
    }
  }
  const auto w_out = params.w_out();
  const double *h_last = cache.h.data() + T * H;
  double y = params.b_out();
  for (std::size_t j = 0; j < H; ++j) y += w_out[j] * h_last[j];
  if (!std::isfinite(y)) non_finite(T);
  res.prediction = y;
  cache.prediction = y;
  if (stamp) cache.params_fingerprint = params.fingerprint();
  return res;
}

} // namespace

ForwardResult lstm_forward(const LstmParams &params,
                           std::span<const double> window) {
  return forward_impl(params, window, true);
}

double lstm_predict_normalized(const LstmParams &params,
                               std::span<const double> window) {
  const auto T = steps_of(params, window);
  const auto H = params.hidden_size();
  const auto F = params.n_features();
  std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
  for (std::size_t t = 0; t < T; ++t) {
    gate_step(params, window.data() + t * F, h.data(), z.data());
    for (std::size_t j = 0; j < H; ++j) {
      c[j] = z[H + j] * c[j] + z[j] * z[3 * H + j];
      h[j] = z[2 * H + j] * std::tanh(c[j]);
      if (!std::isfinite(c[j]) || !std::isfinite(h[j])) non_finite(t);
    }
  }
  const auto w_out = params.w_out();
  double y = params.b_out();
  for (std::size_t j = 0; j < H; ++j) y += w_out[j] * h[j];
  if (!std::isfinite(y)) non_finite(T);
  return y;
}

namespace {

/// BPTT with a cache known to be fresh; accumulates into `grad`.
void backward_unchecked(const LstmParams &params, double target,
                        const ForwardCache &cache, LstmParams &grad) {
  const auto T = cache.steps;
  const auto H = params.hidden_size();
  const auto F = params.n_features();
  const double dy = 2.0 * (cache.prediction - target);

  const double *h_last = cache.h.data() + T * H;
  auto gw_out = grad.w_out();
  for (std::size_t j = 0; j < H; ++j) gw_out[j] += dy * h_last[j];
  grad.b_out() += dy;

  const auto w_out = params.w_out();
  const double *U = params.U().data();
  double *gW = grad.W().data();
  double *gU = grad.U().data();
  double *gb = grad.b().data();

  std::vector<double> dh(H), dc_next(H, 0.0), dz(4 * H), dh_prev(H);
  for (std::size_t j = 0; j < H; ++j) dh[j] = dy * w_out[j];

  for (std::size_t t = T; t-- > 0;) {
    const double *z = cache.gates.data() + t * 4 * H;
    const double *tc = cache.tanh_c.data() + t * H;
    const double *c_prev = cache.c.data() + t * H;
    const double *h_prev = cache.h.data() + t * H;
    const double *x = cache.window.data() + t * F;
    for (std::size_t j = 0; j < H; ++j) {
      const double i = z[j], f = z[H + j], o = z[2 * H + j], g = z[3 * H + j];
      const double dc = dc_next[j] + dh[j] * o * (1.0 - tc[j] * tc[j]);
      dz[j] = dc * g * i * (1.0 - i);
      dz[H + j] = dc * c_prev[j] * f * (1.0 - f);
      dz[2 * H + j] = dh[j] * tc[j] * o * (1.0 - o);
      dz[3 * H + j] = dc * i * (1.0 - g * g);
      dc_next[j] = dc * f;
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double d = dz[r];
      gb[r] += d;
      double *gwr = gW + r * F;
      for (std::size_t k = 0; k < F; ++k) gwr[k] += d * x[k];
      double *gur = gU + r * H;
      const double *ur = U + r * H;
      for (std::size_t k = 0; k < H; ++k) {
        gur[k] += d * h_prev[k];
        dh_prev[k] += ur[k] * d;
      }
    }
    dh.swap(dh_prev);
  }
}

} // namespace

LstmParams lstm_backward(const LstmParams &params,
                         std::span<const double> window, double target,
                         const ForwardCache &cache) {
  const auto T = steps_of(params, window);
  if (cache.steps != T || cache.params_fingerprint != params.fingerprint() ||
      !std::equal(window.begin(), window.end(), cache.window.begin(),
                  cache.window.end())) {
    fail(ErrorKind::contract,
         "forward cache does not belong to these parameters and window");
  }
  LstmParams grad(params.n_features(), params.hidden_size());
  backward_unchecked(params, target, cache, grad);
  return grad;
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::configuration, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::configuration, "learning_rate must be positive");
  }
  if (hidden_size < 1) fail(ErrorKind::configuration, "hidden_size must be >= 1");
  if (!(grad_clip_norm > 0.0) || !std::isfinite(grad_clip_norm)) {
    fail(ErrorKind::configuration, "grad_clip_norm must be positive");
  }
}

LstmParams init_params(std::size_t n_features, std::size_t hidden_size,
                       std::uint64_t seed) {
  LstmParams p(n_features, hidden_size);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (double &v : p.values()) v = rng.uniform(-k, k);
  return p;
}

std::vector<double> predict_batch(const LstmParams &params,
                                  const preprocess::WindowedSet &set,
                                  Exec exec) {
  if (set.n_features() != params.n_features()) {
    fail(ErrorKind::shape, "window feature count does not match the model");
  }
  std::vector<double> out(set.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(set.size());
  if (exec == Exec::parallel) {
    // Exceptions must not escape the parallel region.
    bool failed = false;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        out[i] = lstm_predict_normalized(params, set.window(i));
      } catch (const Error &) {
#pragma omp atomic write
        failed = true;
      }
    }
    if (failed) {
      fail(ErrorKind::numeric, "non-finite LSTM state during batch inference");
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      out[i] = lstm_predict_normalized(params, set.window(i));
    }
  }
  return out;
}

namespace {

double batch_mse(const LstmParams &params, const preprocess::WindowedSet &set,
                 Exec exec) {
  if (set.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  const auto pred = predict_batch(params, set, exec);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - set.targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

void check_windows(const preprocess::WindowedSet &set, std::size_t n_features,
                   const char *name) {
  if (set.n_features() != n_features) {
    fail(ErrorKind::shape, std::string(name) + " windows have " +
                               std::to_string(set.n_features()) +
                               " features, expected " +
                               std::to_string(n_features));
  }
}

} // namespace

TrainResult train_lstm(const preprocess::WindowedSet &train,
                       const preprocess::WindowedSet &val,
                       const TrainConfig &config, Exec exec) {
  config.validate();
  if (train.size() == 0) {
    fail(ErrorKind::empty_dataset, "no training windows");
  }
  const auto F = train.n_features();
  if (val.size() > 0) check_windows(val, F, "validation");

  TrainResult result;
  auto &model = result.model;
  model.params = init_params(F, config.hidden_size, config.seed);
  model.feature_names = train.feature_names;
  model.window_len = train.window_len;
  model.scaler = train.scaler;
  model.config = config;

  LstmParams grad(F, config.hidden_size);
  auto params = model.params.values();
  auto g = grad.values();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t s = 0; s < train.size(); ++s) {
      std::fill(g.begin(), g.end(), 0.0);
      const auto fwd = forward_impl(model.params, train.window(s), false);
      backward_unchecked(model.params, train.targets[s], fwd.cache, grad);
      double norm2 = 0.0;
      for (double v : g) norm2 += v * v;
      if (!std::isfinite(norm2)) {
        fail(ErrorKind::numeric,
             "gradient diverged in epoch " + std::to_string(epoch));
      }
      double scale = config.learning_rate;
      const double norm = std::sqrt(norm2);
      if (norm > config.grad_clip_norm) {
        scale *= config.grad_clip_norm / norm;
      }
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= scale * g[k];
    }
    EpochLoss loss{0.0, 0.0};
    try {
      loss.train_mse = batch_mse(model.params, train, exec);
      loss.val_mse = batch_mse(model.params, val, exec);
    } catch (const Error &) {
      loss.train_mse = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(loss.train_mse) ||
        (val.size() > 0 && !std::isfinite(loss.val_mse))) {
      fail(ErrorKind::numeric,
           "training loss diverged (NaN) in epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(loss);
  }
  return result;
}

double predict_lstm(const LstmModel &model, std::span<const double> window) {
  const auto &p = model.params;
  const auto T = steps_of(p, window);
  if (model.window_len != 0 && T != model.window_len) {
    fail(ErrorKind::shape, "window has " + std::to_string(T) +
                               " rows, model expects " +
                               std::to_string(model.window_len));
  }
  if (!model.scaler) {
    return lstm_predict_normalized(p, window);
  }
  const auto F = p.n_features();
  std::vector<double> scaled(window.begin(), window.end());
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < F; ++j) {
      scaled[t * F + j] = model.scaler->features[j].scale(scaled[t * F + j]);
    }
  }
  return preprocess::invert_target(*model.scaler,
                                   lstm_predict_normalized(p, scaled));
}

} // namespace nodewatt::lstm
