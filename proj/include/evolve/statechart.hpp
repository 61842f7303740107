// Flat deterministic state machines: parsing, validation, queries, and
// breadth-first event-path planning over the original model.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evolve::statechart {

using StateName = std::string;
using EventName = std::string;

struct Transition {
    StateName from;
    EventName event;
    StateName to;

    auto operator<=>(const Transition&) const = default;
};

struct TimeoutSpec {
    StateName state;
    std::int64_t delay_ms = 0;  // strictly positive
    EventName emits;

    auto operator<=>(const TimeoutSpec&) const = default;
};

// Malformed document (bad JSON, unknown field, wrong type). Carries a
// 1-based line/column where one could be attributed.
struct SyntaxError : std::runtime_error {
    SyntaxError(const std::string& what, int line_, int column_)
        : std::runtime_error(what), line(line_), column(column_) {}
    int line = 0;
    int column = 0;
};

// A structurally well-formed document that violates a machine invariant;
// the message names the invariant.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No event sequence leads from `from` to `to` in the machine.
struct Unreachable : std::runtime_error {
    Unreachable(StateName from_, StateName to_)
        : std::runtime_error("no event path from '" + from_ + "' to '" + to_ + "'"),
          from(std::move(from_)),
          to(std::move(to_)) {}
    StateName from;
    StateName to;
};

// Immutable after construction; the constructor enforces every invariant
// (initial membership, determinism, declared endpoints/events, timeout
// effectiveness) and throws InvariantError otherwise.
class StateMachine {
public:
    StateMachine(std::string name,
                 StateName initial,
                 std::set<EventName> events,
                 std::set<StateName> states,
                 std::vector<Transition> transitions,
                 std::vector<TimeoutSpec> timeouts);

    const std::string& name() const { return name_; }
    const StateName& initial() const { return initial_; }
    const std::set<EventName>& events() const { return events_; }
    const std::set<StateName>& states() const { return states_; }
    // Normalized: sorted by (from, event, to).
    const std::vector<Transition>& transitions() const { return transitions_; }
    // Sorted by state.
    const std::vector<TimeoutSpec>& timeouts() const { return timeouts_; }

    std::optional<TimeoutSpec> timeout_for(const StateName& s) const;

    // Outgoing transitions of `s` sorted by (event, to) — the planner's
    // canonical expansion order.
    const std::vector<Transition>& outgoing(const StateName& s) const;

    bool operator==(const StateMachine&) const = default;

private:
    std::string name_;
    StateName initial_;
    std::set<EventName> events_;
    std::set<StateName> states_;
    std::vector<Transition> transitions_;
    std::vector<TimeoutSpec> timeouts_;
    std::map<std::pair<StateName, EventName>, StateName> table_;
    std::map<StateName, std::vector<Transition>> outgoing_;

    friend bool exists_transition(const StateMachine&, const StateName&, const EventName&);
    friend std::optional<StateName> next_state(const StateMachine&, const StateName&,
                                               const EventName&);
};

// Strict JSON machine document. Unknown fields, wrong types and malformed
// JSON raise SyntaxError; shape-correct documents violating a machine
// invariant raise InvariantError.
StateMachine parse_machine(const std::string& doc);

// Canonical serialization: sorted events/states/transitions, stable field
// order. serialize -> parse round-trips to an equal machine.
std::string serialize_machine(const StateMachine& m);

bool exists_state(const StateMachine& m, const StateName& s);
bool exists_transition(const StateMachine& m, const StateName& s, const EventName& e);

// T is a partial function: absence is a value, not an error.
std::optional<StateName> next_state(const StateMachine& m, const StateName& s,
                                    const EventName& e);

// Shortest event sequence driving `from` to `to`; empty when from == to.
// Ties are broken by breadth-first expansion in lexicographic (event, to)
// order, which yields the lexicographically least (event, to)-sequence
// among all shortest ones. Throws Unreachable when no path exists, and
// InvariantError when either endpoint is not a state of m.
std::vector<EventName> event_path(const StateMachine& m, const StateName& from,
                                  const StateName& to);

struct Diagnostic {
    enum class Kind { unreachable_state, terminal_state, dead_timer };
    Kind kind;
    StateName state;
    std::string message;

    auto operator<=>(const Diagnostic&) const = default;
};

// Warnings only: unreachable states, terminal states (no outgoing
// transitions), timers whose event can never fire at their state. The
// last class is rejected at construction already and is re-checked here
// for machines assembled by hand.
std::vector<Diagnostic> validate_machine(const StateMachine& m);

}  // namespace evolve::statechart
