#pragma once

#include <iostream>

namespace selfscore {

/// Entry point of the `selfscore` tool: ingest, run, recalc, stats, report.
/// Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

} // namespace selfscore
