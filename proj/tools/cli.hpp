// Copyright 2026 The a2lp Authors
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

#ifndef A2LP_TOOLS_CLI_HPP_
#define A2LP_TOOLS_CLI_HPP_

#include <iosfwd>

namespace a2lp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerificationFailed = 2;

// Entry point of the a2lp tool with injectable streams. Subcommands:
// bench, solve, gradcheck, synth.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace a2lp::cli

#endif  // A2LP_TOOLS_CLI_HPP_
