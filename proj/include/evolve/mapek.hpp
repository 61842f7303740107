// The event converter: monitor -> analyze -> plan -> execute over shared
// Knowledge, with a multi-producer single-consumer event queue, state-entry
// timers and lifecycle control.
#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evolve/clock.hpp"
#include "evolve/evolution.hpp"
#include "evolve/statechart.hpp"

namespace evolve::mapek {

using statechart::EventName;
using statechart::StateMachine;
using statechart::StateName;

enum class Source { Controller, Device, Internal };
enum class Mode { Existing, New, Rejected };

const char* to_string(Source s);
const char* to_string(Mode m);
std::optional<Source> source_from_string(const std::string& s);
std::optional<Mode> mode_from_string(const std::string& s);

struct IncomingEvent {
    EventName name;
    Source source = Source::Controller;
    std::uint64_t seq = 0;  // strictly increasing per queue
};

struct ActionSpec {
    enum class Kind { Forward, Invoke, None };
    Kind kind = Kind::None;
    std::vector<EventName> events;  // Forward: non-empty, all in E_o
    std::string handler;            // Invoke: a registered handler name

    bool operator==(const ActionSpec&) const = default;
};

struct StepRecord {
    IncomingEvent event;
    Mode mode = Mode::Rejected;
    ActionSpec action;
    StateName o_before, o_after;
    StateName n_before, n_after;
    // Non-empty only for degraded steps (plan failure); rendered as a
    // '#' note after the trace line, never inside it.
    std::string note;
};

// What a handler gets: the step that invoked it, a way to enqueue internal
// events, and the shared scheduler for delayed work. Handlers never touch
// Knowledge directly.
struct HandlerContext {
    StepRecord record;
    std::function<std::uint64_t(const EventName&, Source)> enqueue;
    Scheduler* scheduler = nullptr;
    // Scratch shared with the scenario harness (e.g. the light bulb's
    // incandescent color flag).
    std::map<std::string, std::string>* flags = nullptr;
};

using Handler = std::function<void(HandlerContext&)>;

struct DuplicateHandler : std::runtime_error {
    explicit DuplicateHandler(const StateName& s)
        : std::runtime_error("handler already registered for state '" + s + "'") {}
};

struct MissingHandler : std::runtime_error {
    explicit MissingHandler(const StateName& s)
        : std::runtime_error("no handler registered for new state '" + s + "'"),
          state(s) {}
    StateName state;
};

class HandlerRegistry {
public:
    // Throws DuplicateHandler on a second registration for the same state.
    void register_handler(const StateName& state, Handler h);
    bool has(const StateName& state) const;
    const Handler& at(const StateName& state) const;
    std::vector<StateName> names() const;

private:
    std::map<StateName, Handler> handlers_;
};

// Knowledge: both models, their current states, the transition-action
// table (one entry per evolved-model transition) and the handler registry.
class Knowledge {
public:
    struct TableEntry {
        StateName next;
        ActionSpec::Kind kind;  // Forward entries compute events at plan time
        std::string handler;    // Invoke only
    };

    const StateMachine& o_model() const { return pair_.original(); }
    const StateMachine& n_model() const { return pair_.evolved(); }
    const StateName& o_state() const { return o_state_; }
    const StateName& n_state() const { return n_state_; }
    const std::map<std::pair<StateName, EventName>, TableEntry>& table() const {
        return table_;
    }
    const HandlerRegistry& handlers() const { return handlers_; }

private:
    Knowledge(evolution::ValidatedPair pair, HandlerRegistry handlers);

    evolution::ValidatedPair pair_;
    StateName o_state_, n_state_;
    std::map<std::pair<StateName, EventName>, TableEntry> table_;
    HandlerRegistry handlers_;

    friend Knowledge build_knowledge(const evolution::ValidatedPair&, HandlerRegistry);
    friend StepRecord step(const Knowledge&, const IncomingEvent&);
    friend void apply(Knowledge&, const StepRecord&);
};

// Materializes the table (forward for targets in S_o, invoke otherwise)
// and pins oState = nState = initial. Throws MissingHandler when a new
// state has no registered handler.
Knowledge build_knowledge(const evolution::ValidatedPair& pair, HandlerRegistry handlers);

// Pure decision function — Algorithm-1 semantics with two documented
// deviations: (a) oState advances to the plan's target (the algorithm's
// line-9 single-event update cannot express multi-event plans), and
// (b) when the incoming event itself drives oModel straight to the target,
// the plan is that event rather than a recomputed path ("event_b =
// event_a"). An empty path (oState already at target) yields kind=None.
// Plan failures degrade to Rejected with an explanatory note.
StepRecord step(const Knowledge& k, const IncomingEvent& e);

// Applies a StepRecord's state updates to the knowledge. No I/O.
void apply(Knowledge& k, const StepRecord& r);

struct QueueClosed : std::runtime_error {
    QueueClosed() : std::runtime_error("event queue is closed") {}
};

// Multi-producer single-consumer FIFO. enqueue() is callable from any
// thread (handlers, timers, socket readers); close() makes every further
// enqueue throw QueueClosed.
class EventQueue {
public:
    std::uint64_t enqueue(const EventName& name, Source src);
    std::optional<IncomingEvent> try_dequeue();
    std::size_t depth() const;
    void close();
    bool closed() const;

    // Wakes any run_loop consumer blocked on this queue (shared condition
    // with control delivery; see Loop).
    std::condition_variable& signal() { return cv_; }
    std::mutex& mutex() const { return mu_; }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<IncomingEvent> q_;
    std::uint64_t next_seq_ = 1;
    bool closed_ = false;
};

struct ControlReply {
    bool ok = false;
    std::string text;  // status JSON line, "ok", or error message
};

struct InvalidCommand : std::runtime_error {
    explicit InvalidCommand(const std::string& cmd)
        : std::runtime_error("unknown control command '" + cmd + "'") {}
};

// Sink failures are traced, never fatal (states already advanced).
struct SinkFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything the loop touches in the outside world. The scenario harness
// wires these to the virtual clock and a simulated device; live mode to
// sockets, threads and a wall-clock scheduler.
struct LoopServices {
    std::function<void(const EventName&)> sink;  // deliver one E_o event
    // Launch a handler ("in the another thread"); scenario mode calls it
    // inline, live mode spawns a thread.
    std::function<void(const Handler&, HandlerContext)> launch;
    Scheduler* scheduler = nullptr;  // state-entry timers
    std::function<void(const StepRecord&)> trace;
    std::function<void(const std::string&)> trace_note;  // '#' lines
    std::map<std::string, std::string>* flags = nullptr;
};

// Single consumer around Knowledge + queue. pump_one() processes exactly
// one pending event (the scenario harness drives it directly under the
// virtual clock); run() blocks and serves the queue until exit (live
// mode). A single loop mutex covers each iteration and each control
// command, so commands are serialized between iterations and status
// replies are consistent snapshots.
class Loop {
public:
    Loop(Knowledge k, LoopServices svc);

    EventQueue& queue() { return queue_; }
    const Knowledge& knowledge() const { return k_; }

    // Returns false when paused or nothing is queued.
    bool pump_one();

    // start | stop | status | exit; thread-safe. status returns one JSON
    // line {running, oState, nState, queue_depth, steps_executed}.
    // Unknown commands yield ok=false (InvalidCommand text), never throw.
    ControlReply control(const std::string& cmd);

    // Blocking consumer: processes events while running, sleeps when
    // paused or idle; returns after an exit command. Only live mode
    // calls this.
    void run();

    bool running() const;
    bool exited() const;
    std::uint64_t steps_executed() const;

private:
    bool pump_one_locked();
    void update_timers_locked(const StepRecord& r);
    ControlReply do_control_locked(const std::string& cmd);
    std::string status_json_locked() const;

    Knowledge k_;
    LoopServices svc_;
    EventQueue queue_;

    mutable std::mutex loop_mu_;
    bool running_ = true;
    bool exited_ = false;
    std::uint64_t steps_ = 0;
    std::optional<TimerId> active_timer_;
};

}  // namespace evolve::mapek
