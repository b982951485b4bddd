#pragma once

#include <iosfwd>

namespace mlrules {

/// Entry point of the mlrules command line tool. Subcommands: train, predict,
/// evaluate, best-head, stats, deps. Errors are reported as one "error: ..." line
/// on `err` with exit code 1.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mlrules
