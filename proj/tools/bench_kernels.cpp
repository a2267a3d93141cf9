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

// Serial versus OpenMP variants of the hot kernels.

#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "nodewatt/gbt.hpp"
#include "nodewatt/lstm.hpp"
#include "nodewatt/rng.hpp"

namespace {

using nodewatt::Exec;

struct Matrix {
  std::vector<double> x, y;
  std::size_t rows, cols;
  nodewatt::gbt::MatrixView view() const { return {x, rows, cols}; }
};

Matrix random_matrix(std::size_t rows, std::size_t cols) {
  nodewatt::Rng rng(1);
  Matrix m{std::vector<double>(rows * cols), std::vector<double>(rows), rows, cols};
  for (auto &v : m.x) v = rng.uniform();
  for (auto &v : m.y) v = rng.normal();
  return m;
}

Exec exec_of(const benchmark::State &state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

void BM_BestSplit(benchmark::State &state) {
  const auto m = random_matrix(4096, 96);
  std::vector<std::size_t> rows(m.rows);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodewatt::gbt::best_split(m.view(), m.y, rows, 2, exec_of(state)));
  }
}

void BM_FitTree(benchmark::State &state) {
  const auto m = random_matrix(2048, 96);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodewatt::gbt::fit_tree(m.view(), m.y, 3, 2, exec_of(state)));
  }
}

void BM_GbtPredictBatch(benchmark::State &state) {
  const auto m = random_matrix(2048, 6);
  const auto fit = nodewatt::gbt::fit_gbt(m.view(), m.y, {50, 0.1, 3, 2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodewatt::gbt::predict_batch(fit.model, m.view(), exec_of(state)));
  }
}

void BM_LstmPredictBatch(benchmark::State &state) {
  nodewatt::preprocess::WindowedSet set;
  set.window_len = 16;
  set.feature_names = {"a", "b", "c", "d", "e", "f"};
  nodewatt::Rng rng(2);
  set.inputs.resize(1000 * 16 * 6);
  for (auto &v : set.inputs) v = rng.uniform();
  set.targets.assign(1000, 0.0);
  const auto params = nodewatt::lstm::init_params(6, 32, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodewatt::lstm::predict_batch(params, set, exec_of(state)));
  }
}

} // namespace

BENCHMARK(BM_BestSplit)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_FitTree)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_GbtPredictBatch)->Arg(0)->Arg(1)->ArgName("parallel");
BENCHMARK(BM_LstmPredictBatch)->Arg(0)->Arg(1)->ArgName("parallel");

BENCHMARK_MAIN();
