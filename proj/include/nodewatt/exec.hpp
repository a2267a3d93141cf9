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

#ifndef NODEWATT__EXEC_HPP_
#define NODEWATT__EXEC_HPP_

namespace nodewatt {

/// Selects between the serial reference kernels and their OpenMP variants.
/// Both produce bit-identical results; reductions are always serial.
enum class Exec { serial, parallel };

} // namespace nodewatt

#endif // NODEWATT__EXEC_HPP_
