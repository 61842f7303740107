// Evolution-condition checks on (original, evolved) machine pairs and
// the structural diff the converter's knowledge is built from.
#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "evolve/statechart.hpp"

namespace evolve::evolution {

using statechart::EventName;
using statechart::StateMachine;
using statechart::StateName;
using statechart::Transition;

struct EvolutionPair {
    StateMachine original;  // Sys_o
    StateMachine evolved;   // Sys_n
};

struct ConditionReport {
    bool condition1_holds = false;  // E_o ⊆ E_n
    bool condition2_holds = false;  // S_o ⊆ S_n
    std::set<EventName> missing_events;
    std::set<StateName> missing_states;

    bool ok() const { return condition1_holds && condition2_holds; }
};

// A transition whose (from, event) survives but whose target changed.
struct ModifiedTransition {
    StateName from;
    EventName event;
    StateName old_to;
    StateName new_to;

    auto operator<=>(const ModifiedTransition&) const = default;
};

// Every transition of both machines lands in exactly one bucket (a
// modified pair counts its original and evolved halves together).
struct EvolutionDiff {
    std::set<StateName> new_states;  // S_n \ S_o
    std::set<EventName> new_events;  // E_n \ E_o
    std::vector<Transition> retained_transitions;
    std::vector<Transition> added_transitions;
    std::vector<ModifiedTransition> modified_transitions;
    std::vector<Transition> removed_transitions;  // reported, never fatal
};

struct GateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConditionsViolated : GateError {
    explicit ConditionsViolated(ConditionReport r);
    ConditionReport report;
};

struct UnreachableStates : GateError {
    explicit UnreachableStates(std::vector<StateName> s);
    std::vector<StateName> states;
};

ConditionReport check_conditions(const EvolutionPair& p);

// Requires check_conditions(p).ok(); throws ConditionsViolated otherwise.
EvolutionDiff diff(const EvolutionPair& p);

// Opaque token proving the pair cleared the runtime gate: conditions hold,
// the evolved machine has no unreachable states, and initial states agree
// (a recorded assumption, not paper-mandated). Only gate_for_runtime mints
// these; mapek::build_knowledge consumes them.
class ValidatedPair {
public:
    const StateMachine& original() const { return body_->pair.original; }
    const StateMachine& evolved() const { return body_->pair.evolved; }
    const EvolutionDiff& diff() const { return body_->diff; }

private:
    struct Body {
        EvolutionPair pair;
        EvolutionDiff diff;
    };
    explicit ValidatedPair(std::shared_ptr<const Body> b) : body_(std::move(b)) {}
    std::shared_ptr<const Body> body_;

    friend ValidatedPair gate_for_runtime(const EvolutionPair&);
};

// Throws ConditionsViolated, UnreachableStates, or GateError (initial
// state mismatch).
ValidatedPair gate_for_runtime(const EvolutionPair& p);

// JSON renderings with lexicographically sorted sets (consumed by the
// cli validate command).
std::string report_to_json(const ConditionReport& r);
std::string diff_to_json(const EvolutionDiff& d);

}  // namespace evolve::evolution
