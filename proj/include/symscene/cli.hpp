// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace symscene::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
// `send` completed but at least one frame was not accepted.
inline constexpr int kExitRejected = 3;

/// Entry point for the `symscene` tool. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Asks a running `serve` to shut down; safe from a signal handler.
void request_shutdown() noexcept;

}  // namespace symscene::cli
