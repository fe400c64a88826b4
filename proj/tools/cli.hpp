#pragma once

#include <iosfwd>

namespace kolmo::cli {

/// Parses argv, runs one subcommand and writes its document to `out` (or to
/// the --out file). Diagnostics and usage go to `err`.
///
/// Exit codes: 0 on success; 1 when the computation ran but the outcome is
/// negative (failed certificate, breach, divergence, inconclusive estimate),
/// with the document still written; 2 on invalid input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kolmo::cli
