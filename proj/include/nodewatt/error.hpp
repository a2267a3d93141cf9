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

#ifndef NODEWATT__ERROR_HPP_
#define NODEWATT__ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace nodewatt {

enum class ErrorKind {
  invalid_argument,
  configuration,
  ordering,
  parse,
  missing_aggregate,
  io,
  shape,
  numeric,
  contract,
  insufficient_data,
  empty_dataset,
  schema,
  unsupported_version,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Validation-class failures map to CLI exit code 1, the rest to 2.
  bool is_validation() const noexcept;

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &message) {
  throw Error(kind, message);
}

} // namespace nodewatt

#endif // NODEWATT__ERROR_HPP_
