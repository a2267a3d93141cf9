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

#include "nodewatt/service.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "nodewatt/error.hpp"

namespace nodewatt::app {

using json = nlohmann::json;

namespace {

HttpReply error_reply(int status, const std::string &message) {
  return {status, json{{"error", message}}.dump()};
}

} // namespace

struct InferenceService::Server {
  httplib::Server http;
};

InferenceService::InferenceService(ModelFile file)
    : file_(std::move(file)), server_(std::make_unique<Server>()) {
  auto &http = server_->http;
  auto send = [](httplib::Response &res, const HttpReply &r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  http.Post("/predict", [this, send](const httplib::Request &req, httplib::Response &res) {
    send(res, predict(req.body));
  });
  http.Get("/health", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, health());
  });
  http.Get("/importance", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, importance());
  });
  http.Get("/model", [this, send](const httplib::Request &, httplib::Response &res) {
    send(res, model_info());
  });
}

InferenceService::~InferenceService() { stop(); }

HttpReply InferenceService::predict(std::string_view body) const {
  const auto parsed = json::parse(body.begin(), body.end(), nullptr, false);
  if (parsed.is_discarded()) return error_reply(400, "body is not valid JSON");
  if (!parsed.is_object() || !parsed.contains("window")) {
    return error_reply(400, "body must be an object with a 'window' field");
  }
  const auto &win = parsed["window"];
  if (!win.is_array() || win.empty()) {
    return error_reply(400, "'window' must be a non-empty array of feature rows");
  }

  const auto &names = feature_names_of(file_.model);
  const auto F = names.size();
  const auto W = window_len_of(file_.model);
  std::vector<double> flat;
  flat.reserve(win.size() * F);
  for (std::size_t r = 0; r < win.size(); ++r) {
    const auto &row = win[r];
    if (!row.is_array()) return error_reply(400, "window row " + std::to_string(r) + " is not an array");
    for (const auto &v : row) {
      if (!v.is_number()) return error_reply(400, "window row " + std::to_string(r) + " holds a non-number");
      flat.push_back(v.get<double>());
    }
    if (row.size() != F) {
      return error_reply(422, "window row " + std::to_string(r) + " has " +
                                  std::to_string(row.size()) + " features, model expects " +
                                  std::to_string(F));
    }
  }
  if (win.size() != W) {
    return error_reply(422, "window has " + std::to_string(win.size()) +
                                " rows, model expects " + std::to_string(W));
  }

  double kwh = 0.0;
  try {
    kwh = predict_window(file_.model, flat);
  } catch (const Error &e) {
    return error_reply(422, e.what());
  }
  if (!std::isfinite(kwh)) return error_reply(422, "prediction is not finite");
  return {200, json{{"predicted_kwh", kwh},
                    {"model_kind", std::string(to_string(kind_of(file_.model)))},
                    {"format_version", file_.format_version}}
                   .dump()};
}

HttpReply InferenceService::health() const {
  return {200, json{{"status", "ok"}}.dump()};
}

HttpReply InferenceService::importance() const {
  const auto *g = std::get_if<gbt::GbtModel>(&file_.model);
  if (!g) return error_reply(404, "feature importances exist only for gbt models");
  const auto imp = gbt::feature_importance(*g);
  json entries = json::array();
  for (const auto &[name, value] : imp.entries) {
    entries.push_back({{"feature", name}, {"importance", value}});
  }
  return {200, json{{"importances", std::move(entries)}, {"no_splits", imp.no_splits}}.dump()};
}

HttpReply InferenceService::model_info() const {
  return {200, metadata_json(file_.metadata).dump()};
}

int InferenceService::bind(const std::string &host, int port) {
  if (port == 0) {
    const int bound = server_->http.bind_to_any_port(host);
    if (bound < 0) fail(ErrorKind::io, "cannot bind " + host);
    return bound;
  }
  if (!server_->http.bind_to_port(host, port)) {
    fail(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void InferenceService::run() {
  if (!server_->http.listen_after_bind()) fail(ErrorKind::io, "service stopped unexpectedly");
}

void InferenceService::stop() {
  if (server_) server_->http.stop();
}

} // namespace nodewatt::app
