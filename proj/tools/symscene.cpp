// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <iostream>

#include "symscene/cli.hpp"

namespace {

extern "C" void on_signal(int) { symscene::cli::request_shutdown(); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::signal(SIGPIPE, SIG_IGN);
  return symscene::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
