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

#ifndef NODEWATT__SERVICE_HPP_
#define NODEWATT__SERVICE_HPP_

#include <memory>
#include <string>
#include <string_view>

#include "nodewatt/model_file.hpp"

namespace nodewatt::app {

struct HttpReply {
  int status = 200;
  std::string body; // JSON
};

/// Read-only HTTP front end over one loaded model.
///   POST /predict     {"window": [[...], ...]} raw feature rows, oldest first
///   GET  /health
///   GET  /importance  GBT only, 404 otherwise
///   GET  /model       training metadata
class InferenceService {
public:
  explicit InferenceService(ModelFile file);
  ~InferenceService();
  InferenceService(const InferenceService &) = delete;
  InferenceService &operator=(const InferenceService &) = delete;

  HttpReply predict(std::string_view body) const;
  HttpReply health() const;
  HttpReply importance() const;
  HttpReply model_info() const;

  /// Binds and returns the bound port (an ephemeral one when port is 0).
  int bind(const std::string &host, int port);
  /// Serves until stop(); call after bind.
  void run();
  void stop();

  const ModelFile &file() const noexcept { return file_; }

private:
  struct Server;
  ModelFile file_;
  std::unique_ptr<Server> server_;
};

} // namespace nodewatt::app

#endif // NODEWATT__SERVICE_HPP_
