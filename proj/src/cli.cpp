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

#include "nodewatt/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nodewatt/collector.hpp"
#include "nodewatt/error.hpp"
#include "nodewatt/eval.hpp"
#include "nodewatt/pipeline.hpp"
#include "nodewatt/service.hpp"

namespace nodewatt::app {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return eval::format_sig9(v); }

std::string read_text(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

TimestampMs parse_date_ms(const std::string &text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    fail(ErrorKind::configuration, "date '" + text + "' is not YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) fail(ErrorKind::configuration, "date '" + text + "' does not exist");
  const auto days = std::chrono::sys_days{ymd};
  return std::chrono::duration_cast<std::chrono::milliseconds>(days.time_since_epoch()).count();
}

struct Common {
  std::string data_dir;

  fs::path base() const {
    if (!data_dir.empty()) return data_dir;
    if (const char *env = std::getenv("GREENBYTES_DATA_DIR"); env && *env) return env;
    return ".";
  }
  fs::path resolve(const std::string &p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base() / path;
  }
};

struct SimulateArgs {
  collector::SynthConfig cfg;
  std::string profile = "bursty";
  std::string node = "master";
  std::string out;
};

struct CollectArgs {
  std::string mpstat, energy_log, rapl_dir, date, node = "master", out;
  std::uint64_t max_range_uj = 0;
  double default_freq_mhz = 2000.0;
};

struct PreprocessArgs {
  std::string input, out, gap = "interpolate", node = "master";
  double z = 3.0;
};

struct TrainArgs {
  std::string model = "lstm", input, out, features, loss_history, node = "master";
  PipelineConfig cfg;
  bool no_clean = false;
  bool serial = false;
};

struct EvaluateArgs {
  std::string model, input, series, node = "master";
  bool svg = false;
  bool per_node_rescale = false;
};

struct TransferArgs {
  std::string model, workers, out_dir = ".";
  bool svg = false;
};

struct ServeArgs {
  std::string model, host = "127.0.0.1";
  int port = 8080;
};

struct ExportArgs {
  std::string kind = "loss", model, input, out, node = "master";
  bool svg = false;
};

int do_simulate(const Common &c, SimulateArgs a, std::ostream &out) {
  a.cfg.workload_profile = collector::parse_profile(a.profile);
  a.cfg.node = NodeRole::parse(a.node);
  a.cfg.validate();
  const auto ds = collector::simulate(a.cfg);
  const auto path = c.resolve(a.out);
  collector::write_jsonl(path, ds);
  out << "wrote " << ds.size() << " samples to " << path.string() << "\n";
  return kExitOk;
}

int do_collect(const Common &c, const CollectArgs &a, std::ostream &out) {
  collector::MpstatOptions opts;
  opts.default_freq_mhz = a.default_freq_mhz;
  if (!a.date.empty()) opts.base_date_ms = parse_date_ms(a.date);
  if (!(opts.default_freq_mhz > 0.0)) fail(ErrorKind::configuration, "default frequency must be positive");

  std::uint64_t max_range = a.max_range_uj;
  if (!a.rapl_dir.empty()) {
    max_range = collector::parse_counter_value(read_text(c.resolve(a.rapl_dir) / "max_energy_range_uj"));
  }
  if (max_range == 0) fail(ErrorKind::configuration, "a counter range is required (--max-range-uj or --rapl-dir)");

  const auto blocks = collector::parse_mpstat_blocks(read_text(c.resolve(a.mpstat)), opts);
  const auto readings = collector::parse_energy_log(read_text(c.resolve(a.energy_log)), max_range);
  const auto samples = collector::assemble_samples(blocks, readings, opts);

  const auto path = c.resolve(a.out);
  std::ofstream sink(path, std::ios::binary | std::ios::trunc);
  if (!sink) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  collector::RecordStore store(sink);
  for (const auto &s : samples) collector::record(store, s);
  sink.flush();
  if (!sink) fail(ErrorKind::io, "failed writing " + path.string());
  out << "collected " << store.size() << " samples for " << NodeRole::parse(a.node).to_string()
      << " into " << path.string() << "\n";
  return kExitOk;
}

int do_preprocess(const Common &c, const PreprocessArgs &a, std::ostream &out) {
  if (!(a.z > 0.0)) fail(ErrorKind::configuration, "z threshold must be positive");
  preprocess::GapPolicy gap;
  if (a.gap == "interpolate") gap = preprocess::GapPolicy::interpolate;
  else if (a.gap == "drop") gap = preprocess::GapPolicy::drop;
  else fail(ErrorKind::configuration, "unknown gap policy '" + a.gap + "' (expected interpolate|drop)");

  const auto raw = collector::read_jsonl(c.resolve(a.input), NodeRole::parse(a.node));
  const auto cleaned = preprocess::clean(raw, a.z, gap);
  const auto path = c.resolve(a.out);
  collector::write_jsonl(path, cleaned);
  out << "kept " << cleaned.size() << " of " << raw.size() << " rows\n";
  return kExitOk;
}

int do_train(const Common &c, TrainArgs a, std::ostream &out) {
  const auto kind = parse_model_kind(a.model);
  if (!a.features.empty()) a.cfg.features = split_list(a.features);
  a.cfg.clean = !a.no_clean;
  a.cfg.exec = a.serial ? Exec::serial : Exec::parallel;
  a.cfg.validate();

  const auto raw = collector::read_jsonl(c.resolve(a.input), NodeRole::parse(a.node));
  const auto result = train_model(kind, raw, a.cfg);
  save_model(result.file, c.resolve(a.out));
  if (!a.loss_history.empty()) {
    eval::export_loss_history(result.loss_history, c.resolve(a.loss_history));
  }
  out << "model " << to_string(kind) << " saved to " << c.resolve(a.out).string() << "\n"
      << "final train mse " << num(result.final_train_mse) << "\n"
      << "final val mse " << num(result.final_val_mse) << "\n";
  return kExitOk;
}

void print_report(std::ostream &out, const eval::EvalReport &r) {
  out << "node " << r.node.to_string() << " model " << to_string(r.model_kind)
      << " points " << r.n_points << "\n"
      << "  mse " << num(r.mse) << " mae " << num(r.mae) << " r2 "
      << (r.r2_undefined ? std::string("undefined") : num(r.r2)) << "\n"
      << "  mse_kwh " << num(r.mse_kwh) << "\n";
}

int do_evaluate(const Common &c, const EvaluateArgs &a, std::ostream &out) {
  const auto file = load_model(c.resolve(a.model));
  const auto raw = collector::read_jsonl(c.resolve(a.input), NodeRole::parse(a.node));
  const auto report = evaluate_dataset(file, raw, a.per_node_rescale);
  print_report(out, report);
  if (!a.series.empty()) eval::export_series(report, c.resolve(a.series), a.svg);
  return kExitOk;
}

int do_transfer(const Common &c, const TransferArgs &a, std::ostream &out) {
  const auto paths = split_list(a.workers);
  if (paths.empty()) fail(ErrorKind::configuration, "--workers needs at least one dataset");
  const auto file = load_model(c.resolve(a.model));
  const auto master_val = file.metadata.final_val_mse;
  const auto kind = to_string(kind_of(file.model));
  const auto dir = c.resolve(a.out_dir);
  fs::create_directories(dir);

  out << "master val mse " << num(master_val) << "\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto node = NodeRole::worker(static_cast<int>(i) + 1);
    const auto raw = collector::read_jsonl(c.resolve(paths[i]), node);
    const auto report = evaluate_dataset(file, raw);
    print_report(out, report);
    out << "  ratio to master val mse " << num(report.mse / master_val) << "\n";
    const auto csv = dir / (node.to_string() + "_" + std::string(kind) + "_series.csv");
    eval::export_series(report, csv, a.svg);
  }
  return kExitOk;
}

int do_serve(const Common &c, const ServeArgs &a, std::ostream &out) {
  if (a.port < 0 || a.port > 65535) fail(ErrorKind::configuration, "port out of range");
  InferenceService svc(load_model(c.resolve(a.model)));
  const int port = svc.bind(a.host, a.port);
  out << "serving on " << a.host << ":" << port << std::endl;
  svc.run();
  return kExitOk;
}

int do_export(const Common &c, const ExportArgs &a, std::ostream &out) {
  const auto file = load_model(c.resolve(a.model));
  const auto path = c.resolve(a.out);
  if (a.kind == "loss") {
    eval::export_loss_history(file.metadata.loss_history, path);
  } else if (a.kind == "series") {
    if (a.input.empty()) fail(ErrorKind::configuration, "series export needs --input");
    const auto raw = collector::read_jsonl(c.resolve(a.input), NodeRole::parse(a.node));
    eval::export_series(evaluate_dataset(file, raw), path, a.svg);
  } else {
    fail(ErrorKind::configuration, "unknown export kind '" + a.kind + "' (expected loss|series)");
  }
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Node energy estimation from CPU telemetry", "nodewatt"};
  app.require_subcommand(1, 1);
  Common common;
  app.add_option("--data-dir", common.data_dir,
                 "Base directory for relative paths (default: $GREENBYTES_DATA_DIR, then .)");

  SimulateArgs sim;
  auto *s = app.add_subcommand("simulate", "Generate a synthetic node dataset");
  s->add_option("--seed", sim.cfg.seed);
  s->add_option("--steps", sim.cfg.duration_steps)->check(CLI::PositiveNumber);
  s->add_option("--profile", sim.profile, "idle|ramp|bursty|diurnal|steady");
  s->add_option("--noise", sim.cfg.noise_std, "Energy noise sd in joules");
  s->add_option("--a-user", sim.cfg.coeffs.a_user);
  s->add_option("--a-sys", sim.cfg.coeffs.a_sys);
  s->add_option("--a-ctx", sim.cfg.coeffs.a_ctx);
  s->add_option("--base", sim.cfg.coeffs.base);
  s->add_option("--interval", sim.cfg.sampling_interval_s, "Sampling interval in seconds");
  s->add_option("--start-ms", sim.cfg.start_timestamp_ms);
  s->add_option("--node", sim.node);
  s->add_option("--out", sim.out)->required();

  CollectArgs col;
  auto *co = app.add_subcommand("collect", "Build a dataset from an mpstat capture and an energy log");
  co->add_option("--mpstat", col.mpstat)->required();
  co->add_option("--energy-log", col.energy_log)->required();
  co->add_option("--max-range-uj", col.max_range_uj);
  co->add_option("--rapl-dir", col.rapl_dir, "Directory holding max_energy_range_uj");
  co->add_option("--default-freq-mhz", col.default_freq_mhz);
  co->add_option("--date", col.date, "Capture date YYYY-MM-DD when the banner lacks one");
  co->add_option("--node", col.node);
  co->add_option("--out", col.out)->required();

  PreprocessArgs pre;
  auto *p = app.add_subcommand("preprocess", "Clean a dataset");
  p->add_option("--input", pre.input)->required();
  p->add_option("--out", pre.out)->required();
  p->add_option("--z", pre.z);
  p->add_option("--gap", pre.gap, "interpolate|drop");
  p->add_option("--node", pre.node);

  TrainArgs tr;
  auto *t = app.add_subcommand("train", "Train a model");
  t->add_option("--model", tr.model, "lstm|gbt")->required();
  t->add_option("--input", tr.input)->required();
  t->add_option("--out", tr.out)->required();
  t->add_option("--features", tr.features, "Comma-separated feature list");
  t->add_option("--train-fraction", tr.cfg.train_fraction);
  t->add_option("--window", tr.cfg.window_len);
  t->add_option("--z", tr.cfg.z_threshold);
  t->add_flag("--no-clean", tr.no_clean);
  t->add_option("--seed", tr.cfg.lstm.seed);
  t->add_option("--epochs", tr.cfg.lstm.epochs);
  t->add_option("--lr", tr.cfg.lstm.learning_rate, "LSTM learning rate");
  t->add_option("--hidden", tr.cfg.lstm.hidden_size);
  t->add_option("--clip", tr.cfg.lstm.grad_clip_norm);
  t->add_option("--estimators", tr.cfg.gbt.n_estimators);
  t->add_option("--gbt-lr", tr.cfg.gbt.learning_rate);
  t->add_option("--max-depth", tr.cfg.gbt.max_depth);
  t->add_option("--min-leaf", tr.cfg.gbt.min_samples_leaf);
  t->add_option("--loss-history", tr.loss_history, "Write the loss history CSV here");
  t->add_option("--node", tr.node);
  t->add_flag("--serial", tr.serial, "Use the serial kernels");

  EvaluateArgs ev;
  auto *e = app.add_subcommand("evaluate", "Score a model on a dataset");
  e->add_option("--model", ev.model)->required();
  e->add_option("--input", ev.input)->required();
  e->add_option("--series", ev.series, "Write actual vs predicted CSV here");
  e->add_flag("--svg", ev.svg);
  e->add_flag("--per-node-rescale", ev.per_node_rescale);
  e->add_option("--node", ev.node);

  TransferArgs tx;
  auto *x = app.add_subcommand("transfer-eval", "Score a master-trained model on worker datasets");
  x->add_option("--model", tx.model)->required();
  x->add_option("--workers", tx.workers, "Comma-separated worker datasets")->required();
  x->add_option("--out-dir", tx.out_dir);
  x->add_flag("--svg", tx.svg);

  ServeArgs sv;
  auto *v = app.add_subcommand("serve", "Serve predictions over HTTP");
  v->add_option("--model", sv.model)->required();
  v->add_option("--port", sv.port);
  v->add_option("--host", sv.host);

  ExportArgs ex;
  auto *xp = app.add_subcommand("export", "Export loss history or a prediction series");
  xp->add_option("--kind", ex.kind, "loss|series");
  xp->add_option("--model", ex.model)->required();
  xp->add_option("--input", ex.input);
  xp->add_option("--out", ex.out)->required();
  xp->add_flag("--svg", ex.svg);
  xp->add_option("--node", ex.node);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &ex_) {
    err << "error: " << ex_.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*s) return do_simulate(common, sim, out);
    if (*co) return do_collect(common, col, out);
    if (*p) return do_preprocess(common, pre, out);
    if (*t) return do_train(common, tr, out);
    if (*e) return do_evaluate(common, ev, out);
    if (*x) return do_transfer(common, tx, out);
    if (*v) return do_serve(common, sv, out);
    if (*xp) return do_export(common, ex, out);
  } catch (const Error &ex_) {
    err << "error: " << ex_.what() << "\n";
    return ex_.is_validation() ? kExitUsage : kExitRuntime;
  } catch (const std::exception &ex_) {
    err << "error: " << ex_.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

} // namespace nodewatt::app
