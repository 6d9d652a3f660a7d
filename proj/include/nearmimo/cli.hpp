// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#pragma once

namespace nearmimo {

/// Entry point behind the command-line binary. Returns 0 on success, 2 on
/// configuration/usage errors, 1 on runtime errors.
int run_cli(int argc, const char* const* argv);

}  // namespace nearmimo
