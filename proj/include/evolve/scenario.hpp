// Deterministic scenario harness: scripted controller events, a simulated
// device, builtin handlers and the converter loop, all under one virtual
// clock. Identical scripts yield byte-identical traces.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "evolve/devices.hpp"
#include "evolve/evolution.hpp"
#include "evolve/mapek.hpp"

namespace evolve::scenario {

struct ScriptAt {
    std::int64_t at_ms;
    statechart::EventName event;
};
struct ScriptAdvance {
    std::int64_t to_ms;
};
using ScriptStep = std::variant<ScriptAt, ScriptAdvance>;

struct ScenarioScript {
    std::vector<ScriptStep> steps;  // timestamps nondecreasing
};

// Lines: `at <ms> <event>` | `advance <ms>` | blank | `# comment`.
// Throws std::runtime_error naming the offending line; enforces
// nondecreasing timestamps.
ScenarioScript parse_script(const std::string& text);

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioResult {
    std::vector<mapek::StepRecord> records;
    std::string trace_text;           // rendered records + '#' notes
    std::string device_log;           // the device's effect log
    std::vector<statechart::EventName> sink_events;  // all events the device received
    std::map<std::string, std::string> flags;        // handler scratch state
    statechart::StateName final_o, final_n;
};

// Wires everything into one run: script events are enqueued at their
// times, due timers fire first, and after the last step the run continues
// to quiescence (no pending timers, empty queue). A step cap turns a
// non-quiescing fixture into a ScenarioError instead of a hang.
ScenarioResult run_scenario(const evolution::ValidatedPair& pair,
                            devices::SimulatedDevice device,
                            const ScenarioScript& script,
                            mapek::HandlerRegistry handlers,
                            std::uint64_t max_steps = 100000);

}  // namespace evolve::scenario
