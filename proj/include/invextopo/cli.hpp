#pragma once

// Command-line front end. One analysis per invocation:
//
//   invex-topo <command> [options]
//   invex-topo --config analysis.json
//
// Commands: sublevel, certify-pl, certify-growth, certify-invex,
// increasing-at-infinity, mountain-pass, pl-flow, minimax-classify,
// minimax-modulus, game-nash, game-rationalize, game-potential.
//
// Every command prints a JSON report to stdout and, with --out DIR, writes
// report.json plus any CSV artifacts there. Exit codes: 0 = all checks pass,
// 1 = at least one fail verdict or an --expect mismatch, 2 = usage/config
// error, 3 = inconclusive. All randomness sits behind --seed (default 42),
// so identical configs reproduce identical reports apart from timings_ms.

#include <iosfwd>

namespace invextopo {

// Parses argv and runs the analysis, writing the report to `out` and
// diagnostics to `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload bound to std::cout / std::cerr.
int run_cli(int argc, const char* const* argv);

}  // namespace invextopo
