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

#include <gtest/gtest.h>

#include <cmath>

#include "../oracles/lstm_reference.hpp"
#include "nodewatt/lstm.hpp"
#include "nodewatt/rng.hpp"
#include "test_util.hpp"

using namespace nodewatt;
using namespace nodewatt::lstm;

namespace {

LstmParams from_cell(const oracle::ScalarCell &c) {
  LstmParams p(1, 1);
  auto W = p.W(), U = p.U(), b = p.b();
  W[0] = c.wi; W[1] = c.wf; W[2] = c.wo; W[3] = c.wg;
  U[0] = c.ui; U[1] = c.uf; U[2] = c.uo; U[3] = c.ug;
  b[0] = c.bi; b[1] = c.bf; b[2] = c.bo; b[3] = c.bg;
  p.w_out()[0] = c.w_out;
  p.b_out() = c.b_out;
  return p;
}

preprocess::WindowedSet windows_of(const std::vector<double> &series, std::size_t W,
                                   const std::vector<double> &targets) {
  preprocess::WindowedSet s;
  s.window_len = W;
  s.feature_names = {"cpu_user"};
  for (std::size_t i = 0; i + W <= series.size() && i < targets.size(); ++i) {
    s.inputs.insert(s.inputs.end(), series.begin() + i, series.begin() + i + W);
    s.targets.push_back(targets[i]);
    s.target_timestamps.push_back(static_cast<TimestampMs>(i));
  }
  return s;
}

} // namespace

TEST(LstmForward, ZeroNetwork) {
  LstmParams p(3, 4);
  const std::vector<double> w{0.3, 0.1, 0.9, 0.5, 0.5, 0.2};
  EXPECT_EQ(lstm_forward(p, w).prediction, 0.0);
}

TEST(LstmForward, HandComputedCell) {
  const oracle::ScalarCell c{0.5, -0.3, 0.8, 0.2, 0.1, 0.4, -0.6, 0.7,
                             0.05, -0.1, 0.2, 0.3, 1.5, -0.25};
  const auto p = from_cell(c);
  // One step by hand: h0 = c0 = 0, x = 0.6.
  const double x = 0.6;
  const double i = 1.0 / (1.0 + std::exp(-(0.5 * x + 0.05)));
  const double o = 1.0 / (1.0 + std::exp(-(0.8 * x + 0.2)));
  const double g = std::tanh(0.2 * x + 0.3);
  const double expect = 1.5 * o * std::tanh(i * g) - 0.25;
  const std::vector<double> w1{x};
  EXPECT_NEAR(lstm_forward(p, w1).prediction, expect, 1e-12);
  const std::vector<double> w3{0.6, -0.2, 0.9};
  EXPECT_NEAR(lstm_forward(p, w3).prediction, oracle::scalar_lstm(c, w3), 1e-12);
}

TEST(LstmForward, OutputHeadLinear) {
  auto p = init_params(2, 3, 5);
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const double base = lstm_forward(p, w).prediction - p.b_out();
  for (auto &v : p.w_out()) v *= 2.0;
  EXPECT_NEAR(lstm_forward(p, w).prediction - p.b_out(), 2.0 * base, 1e-15);
}

TEST(LstmForward, CacheFreePathAgrees) {
  const auto p = init_params(3, 5, 11);
  Rng rng(1);
  std::vector<double> w(12);
  for (auto &v : w) v = rng.uniform();
  EXPECT_EQ(lstm_forward(p, w).prediction, lstm_predict_normalized(p, w));
}

TEST(LstmForward, ShapeError) {
  const auto p = init_params(3, 2, 0);
  const std::vector<double> w{1, 2, 3, 4};
  EXPECT_ERROR_KIND(lstm_forward(p, w), shape);
}

TEST(LstmBackward, ZeroAtTarget) {
  const auto p = init_params(2, 3, 2);
  const std::vector<double> w{0.1, 0.7, 0.4, 0.2};
  const auto fwd = lstm_forward(p, w);
  const auto g = lstm_backward(p, w, fwd.prediction, fwd.cache);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmBackward, MatchesFiniteDifferences) {
  const auto p = init_params(2, 3, 8);
  const std::vector<double> w{0.1, 0.7, 0.4, 0.2, 0.9, 0.3};
  const auto fwd = lstm_forward(p, w);
  const auto g = lstm_backward(p, w, 0.25, fwd.cache);
  const auto fd = oracle::fd_gradient(p, w, 0.25, 1e-5);
  for (std::size_t k = 0; k < fd.size(); ++k) {
    EXPECT_NEAR(g.values()[k], fd[k], 1e-8) << "parameter " << k;
  }
}

TEST(LstmBackward, StaleCacheRejected) {
  auto p = init_params(2, 3, 2);
  const std::vector<double> w{0.1, 0.7, 0.4, 0.2};
  const auto fwd = lstm_forward(p, w);
  const std::vector<double> other{0.1, 0.7, 0.4, 0.3};
  EXPECT_ERROR_KIND(lstm_backward(p, other, 0.0, fwd.cache), contract);
  const std::vector<double> shorter{0.1, 0.7};
  EXPECT_ERROR_KIND(lstm_backward(p, shorter, 0.0, fwd.cache), contract);
  p.b_out() += 1e-3;
  EXPECT_ERROR_KIND(lstm_backward(p, w, 0.0, fwd.cache), contract);
}

TEST(LstmInit, UniformRange) {
  const auto p = init_params(6, 16, 3);
  for (double v : p.values()) {
    EXPECT_LE(std::abs(v), 0.25);
  }
  EXPECT_EQ(p, init_params(6, 16, 3));
  EXPECT_NE(p, init_params(6, 16, 4));
}

TEST(LstmTrain, ConfigValidation) {
  TrainConfig c;
  c.epochs = 0;
  EXPECT_ERROR_KIND(c.validate(), configuration);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_ERROR_KIND(c.validate(), configuration);
  c = {};
  c.grad_clip_norm = -1.0;
  EXPECT_ERROR_KIND(c.validate(), configuration);
}

TEST(LstmTrain, ConstantDataFits) {
  const std::vector<double> xs(40, 0.5), ys(40, 0.8);
  const auto train = windows_of(xs, 3, ys);
  TrainConfig c;
  c.epochs = 60;
  c.hidden_size = 4;
  c.learning_rate = 0.05;
  const auto r = train_lstm(train, {}, c);
  EXPECT_EQ(r.loss_history.size(), 60u);
  EXPECT_TRUE(std::isnan(r.loss_history.back().val_mse));
  const std::vector<double> w(3, 0.5);
  EXPECT_NEAR(lstm_predict_normalized(r.model.params, w), 0.8, 0.05 * 0.8);
}

TEST(LstmTrain, DeterministicAndExecIndependent) {
  Rng rng(2);
  std::vector<double> xs(60), ys(60);
  for (std::size_t i = 0; i < 60; ++i) {
    xs[i] = rng.uniform();
    ys[i] = i ? xs[i - 1] * 0.5 + 0.2 : 0.2;
  }
  const auto train = windows_of(xs, 4, ys);
  TrainConfig c;
  c.epochs = 5;
  c.hidden_size = 6;
  const auto a = train_lstm(train, train, c, Exec::serial);
  const auto b = train_lstm(train, train, c, Exec::parallel);
  EXPECT_EQ(a.model.params, b.model.params);
  for (std::size_t e = 0; e < 5; ++e) {
    EXPECT_EQ(a.loss_history[e].train_mse, b.loss_history[e].train_mse);
  }
  EXPECT_EQ(predict_batch(a.model.params, train, Exec::serial),
            predict_batch(a.model.params, train, Exec::parallel));
}

TEST(LstmPredict, ThroughScaler) {
  LstmModel m;
  m.params = LstmParams(1, 1);
  m.params.b_out() = 0.5;
  m.feature_names = {"cpu_user"};
  m.window_len = 2;
  m.scaler = Scaler{{"cpu_user"}, {MinMax{0, 100}}, MinMax{2.0, 4.0}};
  const std::vector<double> w{10, 20};
  EXPECT_EQ(predict_lstm(m, w), 3.0);
  const std::vector<double> bad{10};
  EXPECT_ERROR_KIND(predict_lstm(m, bad), shape);
}
