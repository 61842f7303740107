// Command-line entry points. Exit codes are a stable contract:
// 0 success, 1 domain failure (conditions, gate, scenario, property
// checks), 2 usage or parse errors.
#pragma once

#include <string>
#include <vector>

namespace evolve::cli {

// `evolve validate|scenario|run|exp2 ...` — the full dispatcher.
int run_cli(int argc, const char* const* argv);

}  // namespace evolve::cli
