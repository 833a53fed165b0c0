#pragma once

namespace eqport::cli {

/// Runs one subcommand. Exit codes: 0 success, 2 precondition or regime
/// failure (including bad input), 3 numerical failure.
int run(int argc, char** argv);

}  // namespace eqport::cli
