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
#include <limits>

#include "nodewatt/eval.hpp"
#include "test_util.hpp"

using namespace nodewatt;
using namespace nodewatt::eval;

TEST(Metrics, HandArithmetic) {
  const std::vector<double> z{0, 0}, o{1, 1};
  EXPECT_EQ(mse(z, o), 1.0);
  const std::vector<double> a{1, 2, 3}, p{2, 2, 2};
  EXPECT_DOUBLE_EQ(mse(a, p), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(mae(a, p), 2.0 / 3.0);
  EXPECT_EQ(r2(a, p).value, 0.0);
}

TEST(Metrics, R2Degenerate) {
  const std::vector<double> c{2, 2, 2};
  EXPECT_EQ(r2(c, c).value, 1.0);
  EXPECT_FALSE(r2(c, c).undefined);
  const std::vector<double> p{2, 2, 3};
  const auto r = r2(c, p);
  EXPECT_TRUE(r.undefined);
  EXPECT_EQ(r.value, -std::numeric_limits<double>::infinity());
}

TEST(Metrics, ShapeErrors) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_ERROR_KIND(mse(a, b), shape);
  EXPECT_ERROR_KIND(mae({}, {}), shape);
}

TEST(FormatSig9, NineSignificantDigits) {
  EXPECT_EQ(format_sig9(0.0), "0.00000000");
  EXPECT_EQ(format_sig9(1.0), "1.00000000");
  EXPECT_EQ(format_sig9(123456.789), "123456.789");
  EXPECT_EQ(format_sig9(1.23456789e-6), "0.00000123456789");
  EXPECT_EQ(format_sig9(-2.5), "-2.50000000");
  EXPECT_EQ(format_sig9(1.5e10), "15000000000");
  EXPECT_EQ(format_sig9(std::nan("")), "nan");
}

namespace {

EvalReport three_points() {
  EvalReport r;
  r.series = {{1000, 1e-6, 1.1e-6}, {2000, 2e-6, 1.9e-6}, {3500, 3e-6, 3e-6}};
  return r;
}

} // namespace

TEST(ExportSeries, CsvLayout) {
  testutil::TempDir dir;
  export_series(three_points(), dir / "s.csv");
  const auto body = testutil::slurp(dir / "s.csv");
  EXPECT_EQ(body,
            "timestamp,actual_kwh,predicted_kwh\n"
            "1.000,0.00000100000000,0.00000110000000\n"
            "2.000,0.00000200000000,0.00000190000000\n"
            "3.500,0.00000300000000,0.00000300000000\n");
  export_series(three_points(), dir / "s.csv");
  EXPECT_EQ(testutil::slurp(dir / "s.csv"), body);
}

TEST(ExportSeries, SvgCompanion) {
  testutil::TempDir dir;
  export_series(three_points(), dir / "s.csv", true);
  const auto svg = testutil::slurp(dir / "s.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(ExportSeries, UnwritablePath) {
  EXPECT_ERROR_KIND(export_series(three_points(), "/nonexistent/dir/s.csv"), io);
}

TEST(ExportLoss, Layout) {
  testutil::TempDir dir;
  const std::vector<LossPoint> h{{0.5, 0.25}, {0.125, std::nan("")}};
  export_loss_history(h, dir / "l.csv");
  EXPECT_EQ(testutil::slurp(dir / "l.csv"),
            "epoch,train_mse,val_mse\n1,0.500000000,0.250000000\n2,0.125000000,nan\n");
}

TEST(Evaluate, IdentityModelOnNormalizedScale) {
  // A GBT with no trees predicts its base everywhere.
  gbt::GbtModel m;
  m.n_features = 1;
  m.base_prediction = 0.5;
  m.feature_names = {"cpu_user"};
  m.window_len = 2;
  m.scaler = Scaler{{"cpu_user"}, {MinMax{0, 10}}, MinMax{0, 4}};
  const auto ds = testutil::column({1, 2, 3, 4, 5}, {0, 1, 2, 3, 4});
  const auto rep = evaluate(m, ds);
  ASSERT_EQ(rep.n_points, 3u);
  // targets 2,3,4 kWh -> 0.5, 0.75, 1.0 normalized; prediction 0.5.
  EXPECT_DOUBLE_EQ(rep.mse, (0.0 + 0.0625 + 0.25) / 3.0);
  EXPECT_DOUBLE_EQ(rep.mse_kwh, (0.0 + 1.0 + 4.0) / 3.0);
  EXPECT_EQ(rep.series[0].timestamp_ms, 2000);
  EXPECT_EQ(rep.series[2].predicted_kwh, 2.0);
}

TEST(Evaluate, ColumnMismatch) {
  gbt::GbtModel m;
  m.n_features = 1;
  m.feature_names = {"cpu_user"};
  const auto ds = testutil::column({1, 2, 3}, {0, 1, 2}, "cpu_system");
  EXPECT_ERROR_KIND(evaluate(m, ds), configuration);
}
