// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#include "nearmimo/cli.hpp"

int main(int argc, char** argv) { return nearmimo::run_cli(argc, argv); }
