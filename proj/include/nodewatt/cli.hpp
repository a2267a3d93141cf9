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

#ifndef NODEWATT__CLI_HPP_
#define NODEWATT__CLI_HPP_

#include <iosfwd>

namespace nodewatt::app {

/// Exit codes returned by run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1; // usage or validation error
inline constexpr int kExitRuntime = 2; // io, numeric or schema error

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

} // namespace nodewatt::app

#endif // NODEWATT__CLI_HPP_
