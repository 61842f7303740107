#include "evolve/scenario.hpp"

#include <sstream>

#include "evolve/trace.hpp"

namespace evolve::scenario {

ScenarioScript parse_script(const std::string& text) {
    ScenarioScript script;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    std::int64_t last_ms = 0;
    auto bad = [&](const std::string& why) {
        throw std::runtime_error("script line " + std::to_string(lineno) + ": " + why +
                                 ": " + line);
    };
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word) || word[0] == '#') continue;

        std::int64_t ms = 0;
        if (word == "at") {
            std::string event;
            if (!(ls >> ms >> event)) bad("expected 'at <ms> <event>'");
            std::string extra;
            if (ls >> extra) bad("trailing tokens");
            if (ms < 0) bad("negative timestamp");
            if (ms < last_ms) bad("timestamps must be nondecreasing");
            script.steps.push_back(ScriptAt{ms, event});
        } else if (word == "advance") {
            if (!(ls >> ms)) bad("expected 'advance <ms>'");
            std::string extra;
            if (ls >> extra) bad("trailing tokens");
            if (ms < 0) bad("negative timestamp");
            if (ms < last_ms) bad("timestamps must be nondecreasing");
            script.steps.push_back(ScriptAdvance{ms});
        } else {
            bad("unknown directive '" + word + "'");
        }
        last_ms = ms;
    }
    return script;
}

ScenarioResult run_scenario(const evolution::ValidatedPair& pair,
                            devices::SimulatedDevice device,
                            const ScenarioScript& script,
                            mapek::HandlerRegistry handlers,
                            std::uint64_t max_steps) {
    if (!(device.machine() == pair.original()))
        throw ScenarioError("device machine does not match the pair's original model");

    ScenarioResult res;
    devices::VirtualClock clock;
    std::string trace_text;

    mapek::LoopServices svc;
    svc.sink = [&](const statechart::EventName& e) {
        device.receive(e);
        res.sink_events.push_back(e);
    };
    // Under the virtual clock a handler's "other thread" is an inline call:
    // all its visible effects are scheduled callbacks or enqueues anyway.
    svc.launch = [](const mapek::Handler& h, mapek::HandlerContext ctx) { h(ctx); };
    svc.scheduler = &clock;
    svc.trace = [&](const mapek::StepRecord& r) {
        res.records.push_back(r);
        trace_text += trace::render_step(r) + "\n";
    };
    svc.trace_note = [&](const std::string& s) { trace_text += s + "\n"; };
    svc.flags = &res.flags;

    mapek::Loop loop(mapek::build_knowledge(pair, std::move(handlers)), std::move(svc));
    device.attach(&clock, [&](const statechart::EventName& e) {
        loop.queue().enqueue(e, mapek::Source::Device);
    });

    std::uint64_t work = 0;
    auto budget = [&] {
        if (++work > max_steps)
            throw ScenarioError("scenario exceeded its step cap (" +
                                std::to_string(max_steps) + ")");
    };
    auto pump_all = [&] {
        while (loop.pump_one()) budget();
    };
    // Fire every timer due by `until` (inclusive), draining the queue
    // between fires so fired events are processed at their own times.
    auto settle_until = [&](std::int64_t until) {
        for (;;) {
            pump_all();
            if (!clock.has_pending() || clock.next_fire_ms() > until) break;
            clock.fire_next();
            budget();
        }
        clock.set_now(until);
        pump_all();
    };

    for (const auto& step : script.steps) {
        if (const auto* at = std::get_if<ScriptAt>(&step)) {
            settle_until(at->at_ms);
            loop.queue().enqueue(at->event, mapek::Source::Controller);
            pump_all();
        } else {
            settle_until(std::get<ScriptAdvance>(step).to_ms);
        }
    }
    // Run to quiescence: no queued events, no pending timers.
    for (;;) {
        pump_all();
        if (!clock.has_pending()) break;
        clock.fire_next();
        budget();
    }

    res.trace_text = std::move(trace_text);
    res.device_log = device.render_log();
    res.final_o = loop.knowledge().o_state();
    res.final_n = loop.knowledge().n_state();
    return res;
}

}  // namespace evolve::scenario
