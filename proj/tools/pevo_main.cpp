// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include <vector>

#include "pevo/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pevo::run_cli(std::move(args));
}
