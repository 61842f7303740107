#include "evolve/mapek.hpp"

#include <chrono>

#include "json.hpp"

namespace evolve::mapek {

const char* to_string(Source s) {
    switch (s) {
        case Source::Controller: return "controller";
        case Source::Device: return "device";
        case Source::Internal: return "internal";
    }
    return "?";
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::Existing: return "existing";
        case Mode::New: return "new";
        case Mode::Rejected: return "rejected";
    }
    return "?";
}

std::optional<Source> source_from_string(const std::string& s) {
    if (s == "controller") return Source::Controller;
    if (s == "device") return Source::Device;
    if (s == "internal") return Source::Internal;
    return std::nullopt;
}

std::optional<Mode> mode_from_string(const std::string& s) {
    if (s == "existing") return Mode::Existing;
    if (s == "new") return Mode::New;
    if (s == "rejected") return Mode::Rejected;
    return std::nullopt;
}

// ---- handlers -----------------------------------------------------------

void HandlerRegistry::register_handler(const StateName& state, Handler h) {
    if (!handlers_.emplace(state, std::move(h)).second) throw DuplicateHandler(state);
}

bool HandlerRegistry::has(const StateName& state) const { return handlers_.count(state); }

const Handler& HandlerRegistry::at(const StateName& state) const {
    return handlers_.at(state);
}

std::vector<StateName> HandlerRegistry::names() const {
    std::vector<StateName> out;
    for (const auto& [name, _] : handlers_) out.push_back(name);
    return out;
}

// ---- knowledge ----------------------------------------------------------

Knowledge::Knowledge(evolution::ValidatedPair pair, HandlerRegistry handlers)
    : pair_(std::move(pair)),
      o_state_(pair_.original().initial()),
      n_state_(pair_.evolved().initial()),
      handlers_(std::move(handlers)) {}

Knowledge build_knowledge(const evolution::ValidatedPair& pair, HandlerRegistry handlers) {
    // Every new state hosts a function; reachability was gated, so each
    // one will eventually be entered and must resolve to a handler.
    for (const auto& s : pair.diff().new_states)
        if (!handlers.has(s)) throw MissingHandler(s);

    Knowledge k(pair, std::move(handlers));
    for (const auto& t : pair.evolved().transitions()) {
        Knowledge::TableEntry entry;
        entry.next = t.to;
        if (pair.original().states().count(t.to)) {
            entry.kind = ActionSpec::Kind::Forward;  // events resolved at plan time
        } else {
            entry.kind = ActionSpec::Kind::Invoke;
            entry.handler = t.to;  // handlers are named by their new state
        }
        k.table_.emplace(std::make_pair(t.from, t.event), std::move(entry));
    }
    return k;
}

StepRecord step(const Knowledge& k, const IncomingEvent& e) {
    StepRecord r;
    r.event = e;
    r.o_before = r.o_after = k.o_state_;
    r.n_before = r.n_after = k.n_state_;
    r.mode = Mode::Rejected;

    auto it = k.table_.find({k.n_state_, e.name});
    if (it == k.table_.end()) return r;  // not acceptable here: nextAction = none

    const Knowledge::TableEntry& entry = it->second;
    if (entry.kind == ActionSpec::Kind::Invoke) {
        r.mode = Mode::New;
        r.action.kind = ActionSpec::Kind::Invoke;
        r.action.handler = entry.handler;
        r.n_after = entry.next;  // the original model holds still
        return r;
    }

    // Existing function: drive the device to the evolved model's target.
    // Prefer forwarding the incoming event verbatim when it already leads
    // there ("event_b = event_a"); otherwise plan a shortest path.
    std::vector<EventName> plan;
    auto direct = statechart::next_state(k.o_model(), k.o_state_, e.name);
    if (direct && *direct == entry.next) {
        plan = {e.name};
    } else {
        try {
            plan = statechart::event_path(k.o_model(), k.o_state_, entry.next);
        } catch (const statechart::Unreachable& u) {
            // The algorithm has no failure branch; degrade to a traced
            // rejection so the converter keeps serving.
            r.note = std::string("plan failure: ") + u.what();
            return r;
        }
    }
    r.mode = Mode::Existing;
    if (plan.empty()) {
        r.action.kind = ActionSpec::Kind::None;  // already at the target
    } else {
        r.action.kind = ActionSpec::Kind::Forward;
        r.action.events = std::move(plan);
    }
    r.o_after = entry.next;
    r.n_after = entry.next;
    return r;
}

void apply(Knowledge& k, const StepRecord& r) {
    if (r.mode == Mode::Rejected) return;
    k.o_state_ = r.o_after;
    k.n_state_ = r.n_after;
}

// ---- queue --------------------------------------------------------------

std::uint64_t EventQueue::enqueue(const EventName& name, Source src) {
    std::uint64_t seq;
    {
        std::lock_guard lk(mu_);
        if (closed_) throw QueueClosed();
        seq = next_seq_++;
        q_.push_back({name, src, seq});
    }
    cv_.notify_all();
    return seq;
}

std::optional<IncomingEvent> EventQueue::try_dequeue() {
    std::lock_guard lk(mu_);
    if (q_.empty()) return std::nullopt;
    IncomingEvent e = std::move(q_.front());
    q_.pop_front();
    return e;
}

std::size_t EventQueue::depth() const {
    std::lock_guard lk(mu_);
    return q_.size();
}

void EventQueue::close() {
    {
        std::lock_guard lk(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventQueue::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

// ---- loop ---------------------------------------------------------------

Loop::Loop(Knowledge k, LoopServices svc) : k_(std::move(k)), svc_(std::move(svc)) {}

bool Loop::pump_one() {
    std::lock_guard lk(loop_mu_);
    return pump_one_locked();
}

bool Loop::pump_one_locked() {
    if (!running_ || exited_) return false;
    auto ev = queue_.try_dequeue();
    if (!ev) return false;

    StepRecord rec = step(k_, *ev);
    apply(k_, rec);
    update_timers_locked(rec);

    if (svc_.trace) svc_.trace(rec);
    if (!rec.note.empty() && svc_.trace_note) svc_.trace_note("# " + rec.note);

    if (rec.action.kind == ActionSpec::Kind::Forward) {
        for (const auto& e : rec.action.events) {
            try {
                if (svc_.sink) svc_.sink(e);
            } catch (const SinkFailure& f) {
                // States already advanced; record and keep serving.
                if (svc_.trace_note)
                    svc_.trace_note(std::string("# sink failure on '") + e +
                                    "': " + f.what());
            }
        }
    } else if (rec.action.kind == ActionSpec::Kind::Invoke) {
        HandlerContext ctx;
        ctx.record = rec;
        ctx.enqueue = [this](const EventName& name, Source src) {
            return queue_.enqueue(name, src);
        };
        ctx.scheduler = svc_.scheduler;
        ctx.flags = svc_.flags;
        if (svc_.launch) svc_.launch(k_.handlers().at(rec.action.handler), std::move(ctx));
    }

    ++steps_;
    return true;
}

void Loop::update_timers_locked(const StepRecord& r) {
    if (r.mode == Mode::Rejected) return;  // no state entered or left
    if (!svc_.scheduler) return;

    // Leaving the previous evolved state (self-loops re-enter and restart).
    if (active_timer_) {
        svc_.scheduler->cancel(*active_timer_);
        active_timer_.reset();
    }
    auto spec = k_.n_model().timeout_for(r.n_after);
    if (!spec) return;
    EventName emits = spec->emits;
    active_timer_ = svc_.scheduler->schedule(spec->delay_ms, [this, emits] {
        try {
            queue_.enqueue(emits, Source::Internal);
        } catch (const QueueClosed&) {
            // racing an exit command; the event is moot
        }
    });
}

ControlReply Loop::control(const std::string& cmd) {
    std::lock_guard lk(loop_mu_);
    return do_control_locked(cmd);
}

ControlReply Loop::do_control_locked(const std::string& cmd) {
    ControlReply reply;
    if (cmd == "start") {
        running_ = !exited_;
        reply.ok = !exited_;
        reply.text = exited_ ? "loop already exited" : "ok";
    } else if (cmd == "stop") {
        running_ = false;
        reply.ok = true;
        reply.text = "ok";
    } else if (cmd == "status") {
        reply.ok = true;
        reply.text = status_json_locked();
    } else if (cmd == "exit") {
        exited_ = true;
        running_ = false;
        if (active_timer_ && svc_.scheduler) svc_.scheduler->cancel(*active_timer_);
        active_timer_.reset();
        queue_.close();
        reply.ok = true;
        reply.text = "ok";
    } else {
        reply.ok = false;
        reply.text = InvalidCommand(cmd).what();
    }
    queue_.signal().notify_all();  // wake a blocked run()
    return reply;
}

std::string Loop::status_json_locked() const {
    nlohmann::ordered_json j;
    j["running"] = running_;
    j["oState"] = k_.o_state();
    j["nState"] = k_.n_state();
    j["queue_depth"] = queue_.depth();
    j["steps_executed"] = steps_;
    return j.dump();
}

void Loop::run() {
    using namespace std::chrono_literals;
    for (;;) {
        {
            std::lock_guard lk(loop_mu_);
            if (exited_) return;
        }
        if (pump_one()) continue;
        // Paused or idle: sleep until an enqueue/control notifies (the
        // timeout is only a safety net against missed wakeups).
        std::unique_lock ql(queue_.mutex());
        queue_.signal().wait_for(ql, 10ms);
    }
}

bool Loop::running() const {
    std::lock_guard lk(loop_mu_);
    return running_;
}

bool Loop::exited() const {
    std::lock_guard lk(loop_mu_);
    return exited_;
}

std::uint64_t Loop::steps_executed() const {
    std::lock_guard lk(loop_mu_);
    return steps_;
}

}  // namespace evolve::mapek
