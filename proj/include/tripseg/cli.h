// Copyright 2026 The tripseg Authors.
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

#ifndef TRIPSEG_CLI_H_
#define TRIPSEG_CLI_H_

#include <ostream>

namespace tripseg {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitIoError = 2;

// Runs one `tripseg <subcommand> ...` invocation. Human summaries go to
// `out`, diagnostics to `err`. Never throws.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tripseg

#endif  // TRIPSEG_CLI_H_
