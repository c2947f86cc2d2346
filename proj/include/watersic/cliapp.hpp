// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace watersic {

/// Entry point behind the `watersic` binary; also callable from tests.
/// Subcommands: bench-rd, quantize, dequantize, waterfill, selftest.
int run_cli(int argc, const char* const* argv);

/// Quick invariant suite used by the selftest subcommand; prints one line
/// per check and returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace watersic
