// Simulated embedded systems (light bulb, cleaning robot), their builtin
// models and handlers, and the deterministic virtual clock the scenario
// harness runs on.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "evolve/clock.hpp"
#include "evolve/mapek.hpp"
#include "evolve/statechart.hpp"

namespace evolve::devices {

using statechart::EventName;
using statechart::StateMachine;
using statechart::StateName;

// ---- builtin machine models -------------------------------------------

StateMachine light_bulb_original();
// Eq.-style evolved bulb: wait carries a 2000 ms timeout that emits
// `timeout`.
StateMachine light_bulb_evolved();

StateMachine cleaning_robot_original();
// spotWait's detour timeout is not fixed by the source material; default
// 3000 ms, overridable.
StateMachine cleaning_robot_evolved(std::int64_t spot_wait_timeout_ms = 3000);

// ---- virtual clock ------------------------------------------------------

// Deterministic scheduler: timers fire in (fire_time, generation) order,
// never spontaneously — the harness pumps them explicitly. Cancelled
// generations are skipped.
class VirtualClock : public Scheduler {
public:
    TimerId schedule(std::int64_t delay_ms, std::function<void()> fn) override;
    void cancel(TimerId id) override;
    std::int64_t now_ms() const override { return now_; }

    bool has_pending() const;
    std::int64_t next_fire_ms() const;  // meaningless when !has_pending()

    // Pops the earliest pending timer, advances now to its fire time and
    // runs it. Precondition: has_pending().
    void fire_next();

    // Advance without firing (used after all due timers ran). Time never
    // decreases.
    void set_now(std::int64_t t);

private:
    struct Entry {
        std::int64_t fire_ms;
        TimerId id;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.fire_ms != b.fire_ms ? a.fire_ms > b.fire_ms : a.id > b.id;
        }
    };

    // Cancellation is lazy: cancelled entries stay heaped until they
    // surface, so the heap is mutable for const inspection.
    void prune() const;

    std::int64_t now_ = 0;
    TimerId next_id_ = 1;
    mutable std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::set<TimerId> pending_;
    mutable std::set<TimerId> cancelled_;
};

// ---- simulated device ---------------------------------------------------

// Emit `emit` on the feedback channel after dwelling dwell_ms in `state`.
struct EmissionRule {
    StateName state;
    std::int64_t dwell_ms;
    EventName emit;
};

// A fixed-function appliance: transitions only via received events over
// its own (original) machine; unknown events are ignored but logged. The
// effect log doubles as the device-truthfulness proof in tests.
class SimulatedDevice {
public:
    SimulatedDevice(StateMachine machine, std::vector<EmissionRule> rules);

    // Wire the dwell timers and the feedback channel. Must be called
    // before receive(); feedback(event) is invoked when an emission fires.
    void attach(Scheduler* clock, std::function<void(const EventName&)> feedback);

    void receive(const EventName& e);

    const StateMachine& machine() const { return machine_; }
    const StateName& state() const { return state_; }

    // Lines `t=<ms> recv=<event> state=<state>` / `t=<ms> emit=<event>`.
    const std::vector<std::string>& effect_log() const { return log_; }
    std::string render_log() const;

private:
    void enter_state();

    StateMachine machine_;
    StateName state_;
    std::vector<EmissionRule> rules_;
    Scheduler* clock_ = nullptr;
    std::function<void(const EventName&)> feedback_;
    std::optional<TimerId> dwell_timer_;
    std::vector<std::string> log_;
};

SimulatedDevice light_bulb_device();
SimulatedDevice cleaning_robot_device(std::int64_t spot_duration_ms = 1000);

struct UnknownDeviceKind : std::runtime_error {
    explicit UnknownDeviceKind(const std::string& kind)
        : std::runtime_error("unknown device kind '" + kind + "'") {}
};

struct HandlerConfig {
    std::int64_t move_duration_ms = 500;
};

// Handlers for the builtin evolved models. robot: move waits
// move_duration_ms then enqueues arriveSpot (internal); spotWait is
// passive. lightbulb: wait is passive (its TimeoutSpec does the work);
// incandescentOn sets flags["color"] = "incandescent".
mapek::HandlerRegistry builtin_handlers(const std::string& device_kind,
                                        const HandlerConfig& cfg = {});

// Registry covering exactly `new_states`, drawn from the union of builtin
// handlers; throws UnknownDeviceKind naming the first state no builtin
// covers. Used when the device is an external endpoint and the handler
// set must be inferred from the evolved model.
mapek::HandlerRegistry builtin_handlers_for(const std::set<StateName>& new_states,
                                            const HandlerConfig& cfg = {});

}  // namespace evolve::devices
