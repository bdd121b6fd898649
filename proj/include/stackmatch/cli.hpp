// Copyright 2026-present the stackmatch project
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

#pragma once

#include <iosfwd>
#include <span>

namespace stackmatch::cli {

// Exit codes shared by the subcommands.
inline constexpr int kOk = 0;
inline constexpr int kNoResults = 1;
inline constexpr int kUnreadableInput = 2;
inline constexpr int kUnwritableOutput = 3;
inline constexpr int kEmptyCorpus = 4;
inline constexpr int kBindFailure = 5;
inline constexpr int kUsage = 64;

/// Entry point for `stackmatch <subcommand> ...`. Machine-readable results
/// go to `out`, logs to `err`.
int run(std::span<const char* const> args, std::istream& in, std::ostream& out,
        std::ostream& err);

/// Asks a running `serve` to shut down (also wired to SIGINT/SIGTERM).
void request_shutdown();

}  // namespace stackmatch::cli
