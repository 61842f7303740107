// Minimal stderr logger driven by the EVOLVE_LOG environment variable
// (silent by default; "info" or "debug").
#pragma once

#include <string>

namespace evolve::log {

enum class Level { Silent = 0, Info = 1, Debug = 2 };

Level level();  // parsed from EVOLVE_LOG once

void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace evolve::log
