// Tab-separated trace records: one line per converter step, plus
// '#'-prefixed note lines. This is the toolkit's canonical log format;
// the paper-style renderer (cli) is a pure function of it.
#pragma once

#include <string>
#include <vector>

#include "evolve/mapek.hpp"

namespace evolve::trace {

// seq=<n>\tevent=<name>\tsrc=<controller|device|internal>\tmode=<existing|new|rejected>
// \tsent=<comma-list or ->\thandler=<name or ->\to=<before>><after>\tn=<before>><after>
std::string render_step(const mapek::StepRecord& r);

// Inverse of render_step for a full document; skips blank and '#' lines.
// Throws std::runtime_error naming the offending line on malformed input.
std::vector<mapek::StepRecord> parse_trace(const std::string& text);

}  // namespace evolve::trace
