#include "evolve/devices.hpp"

#include <utility>

namespace evolve::devices {

// ---- virtual clock -------------------------------------------------------

TimerId VirtualClock::schedule(std::int64_t delay_ms, std::function<void()> fn) {
    TimerId id = next_id_++;
    heap_.push({now_ + delay_ms, id, std::move(fn)});
    pending_.insert(id);
    return id;
}

void VirtualClock::cancel(TimerId id) {
    if (pending_.erase(id)) cancelled_.insert(id);
}

void VirtualClock::prune() const {
    while (!heap_.empty() && cancelled_.count(heap_.top().id)) {
        cancelled_.erase(heap_.top().id);
        heap_.pop();
    }
}

bool VirtualClock::has_pending() const {
    prune();
    return !heap_.empty();
}

std::int64_t VirtualClock::next_fire_ms() const {
    prune();
    return heap_.empty() ? now_ : heap_.top().fire_ms;
}

void VirtualClock::fire_next() {
    prune();
    Entry e = heap_.top();
    heap_.pop();
    pending_.erase(e.id);
    if (e.fire_ms > now_) now_ = e.fire_ms;
    e.fn();  // may schedule or cancel freely
}

void VirtualClock::set_now(std::int64_t t) {
    if (t > now_) now_ = t;
}

// ---- simulated device ----------------------------------------------------

SimulatedDevice::SimulatedDevice(StateMachine machine, std::vector<EmissionRule> rules)
    : machine_(std::move(machine)), state_(machine_.initial()), rules_(std::move(rules)) {}

void SimulatedDevice::attach(Scheduler* clock, std::function<void(const EventName&)> feedback) {
    clock_ = clock;
    feedback_ = std::move(feedback);
    enter_state();
}

void SimulatedDevice::receive(const EventName& e) {
    std::int64_t t = clock_ ? clock_->now_ms() : 0;
    auto nxt = statechart::next_state(machine_, state_, e);
    if (nxt) {
        // Leaving (or re-entering) the state invalidates its dwell timer.
        if (dwell_timer_ && clock_) clock_->cancel(*dwell_timer_);
        dwell_timer_.reset();
        state_ = *nxt;
        log_.push_back("t=" + std::to_string(t) + " recv=" + e + " state=" + state_);
        enter_state();
    } else {
        // A real appliance ignores commands it does not understand; the
        // unchanged state in the log marks the event as a no-op.
        log_.push_back("t=" + std::to_string(t) + " recv=" + e + " state=" + state_);
    }
}

void SimulatedDevice::enter_state() {
    if (!clock_) return;
    for (const auto& rule : rules_) {
        if (rule.state != state_) continue;
        EventName emit = rule.emit;
        dwell_timer_ = clock_->schedule(rule.dwell_ms, [this, emit] {
            log_.push_back("t=" + std::to_string(clock_->now_ms()) + " emit=" + emit);
            if (feedback_) feedback_(emit);
        });
        return;
    }
}

std::string SimulatedDevice::render_log() const {
    std::string out;
    for (const auto& line : log_) out += line + "\n";
    return out;
}

SimulatedDevice light_bulb_device() { return SimulatedDevice(light_bulb_original(), {}); }

SimulatedDevice cleaning_robot_device(std::int64_t spot_duration_ms) {
    return SimulatedDevice(cleaning_robot_original(),
                           {{"spot", spot_duration_ms, "endSpot"}});
}

// ---- builtin handlers -----------------------------------------------------

namespace {

mapek::Handler passive_handler() {
    return [](mapek::HandlerContext&) {};
}

// Simulates the robot's travel to the spot: arriveSpot lands on the queue
// move_duration_ms after the invocation.
mapek::Handler move_handler(std::int64_t move_duration_ms) {
    return [move_duration_ms](mapek::HandlerContext& ctx) {
        auto enqueue = ctx.enqueue;
        auto fire = [enqueue] {
            try {
                enqueue("arriveSpot", mapek::Source::Internal);
            } catch (const mapek::QueueClosed&) {
                // the loop exited while we were travelling
            }
        };
        if (ctx.scheduler)
            ctx.scheduler->schedule(move_duration_ms, fire);
        else
            fire();
    };
}

mapek::Handler incandescent_handler() {
    return [](mapek::HandlerContext& ctx) {
        if (ctx.flags) (*ctx.flags)["color"] = "incandescent";
    };
}

}  // namespace

mapek::HandlerRegistry builtin_handlers(const std::string& device_kind,
                                        const HandlerConfig& cfg) {
    mapek::HandlerRegistry reg;
    if (device_kind == "lightbulb") {
        reg.register_handler("wait", passive_handler());  // TimeoutSpec does the work
        reg.register_handler("incandescentOn", incandescent_handler());
    } else if (device_kind == "robot") {
        reg.register_handler("move", move_handler(cfg.move_duration_ms));
        reg.register_handler("spotWait", passive_handler());
    } else {
        throw UnknownDeviceKind(device_kind);
    }
    return reg;
}

mapek::HandlerRegistry builtin_handlers_for(const std::set<StateName>& new_states,
                                            const HandlerConfig& cfg) {
    mapek::HandlerRegistry reg;
    for (const auto& s : new_states) {
        if (s == "wait" || s == "spotWait")
            reg.register_handler(s, passive_handler());
        else if (s == "incandescentOn")
            reg.register_handler(s, incandescent_handler());
        else if (s == "move")
            reg.register_handler(s, move_handler(cfg.move_duration_ms));
        else
            throw UnknownDeviceKind("no builtin handler for state '" + s + "'");
    }
    return reg;
}

}  // namespace evolve::devices
