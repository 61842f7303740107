// Renders tabular traces in the block style of the original tool's logs
// (Monitor/Analyze/Plan/Execute sections) and parses them back. Rendering
// is a pure function of the trace; parse(render(t)) == t for traces over
// canonical lowercase-first names with queue-ordered seq numbers (1..n —
// the block style does not carry sequence numbers, so parse re-derives
// them from block order).
#pragma once

#include <string>
#include <vector>

#include "evolve/mapek.hpp"

namespace evolve::paperlog {

std::string render(const std::vector<mapek::StepRecord>& records);

// Skips '***' banners, device command echoes and blank lines.
std::vector<mapek::StepRecord> parse(const std::string& text);

}  // namespace evolve::paperlog
