// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mi_isac/cli.hpp"

int main(int argc, char** argv) {
  return mi_isac::cli::run(argc, argv, std::cout, std::cerr);
}
