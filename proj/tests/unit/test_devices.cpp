#include <fstream>
#include <random>
#include <sstream>

#include "common/gen.hpp"
#include "doctest.h"
#include "evolve/devices.hpp"
#include "evolve/evolution.hpp"
#include "evolve/scenario.hpp"
#include "evolve/statechart.hpp"

using namespace evolve;
using namespace evolve::devices;
using evolve::statechart::parse_machine;
using evolve::statechart::StateMachine;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string repo_file(const std::string& rel) {
    return std::string(EVOLVE_REPO_ROOT) + "/" + rel;
}

evolution::ValidatedPair bulb_pair() {
    return evolution::gate_for_runtime({light_bulb_original(), light_bulb_evolved()});
}

evolution::ValidatedPair robot_pair() {
    return evolution::gate_for_runtime(
        {cleaning_robot_original(), cleaning_robot_evolved()});
}

scenario::ScenarioScript script_at(std::vector<std::pair<std::int64_t, std::string>> evs) {
    scenario::ScenarioScript s;
    for (auto& [ms, e] : evs) s.steps.push_back(scenario::ScriptAt{ms, e});
    return s;
}

// Structured view of one StepRecord for compact golden comparisons.
struct Line {
    std::string event;
    mapek::Source src;
    mapek::Mode mode;
    std::vector<std::string> sent;
    std::string handler;
    std::string o_after, n_after;
    bool operator==(const Line&) const = default;
};

std::vector<Line> lines_of(const scenario::ScenarioResult& r) {
    std::vector<Line> out;
    for (const auto& rec : r.records)
        out.push_back({rec.event.name, rec.event.source, rec.mode,
                       rec.action.kind == mapek::ActionSpec::Kind::Forward
                           ? rec.action.events
                           : std::vector<std::string>{},
                       rec.action.kind == mapek::ActionSpec::Kind::Invoke
                           ? rec.action.handler
                           : "",
                       rec.o_after, rec.n_after});
    return out;
}

// Device truthfulness: every logged recv line's state must equal the fold
// of received events over the device's machine (unknown events stay put).
void check_device_log_truthful(const StateMachine& m, const std::string& log) {
    std::istringstream is(log);
    std::string line;
    std::string state = m.initial();
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string t_tok, kind_tok, state_tok;
        REQUIRE(bool(ls >> t_tok >> kind_tok));
        if (kind_tok.rfind("recv=", 0) == 0) {
            REQUIRE(bool(ls >> state_tok));
            auto nxt = statechart::next_state(m, state, kind_tok.substr(5));
            if (nxt) state = *nxt;
            CHECK(state_tok == "state=" + state);
        } else {
            CHECK(kind_tok.rfind("emit=", 0) == 0);
        }
    }
}

// Evolved-behavior conformance: nState values are the fold of the observed
// event sequence over the evolved machine (rejected events stay put).
void check_evolved_fold(const StateMachine& n_model, const scenario::ScenarioResult& r) {
    std::string n = n_model.initial();
    for (const auto& rec : r.records) {
        CHECK(rec.n_before == n);
        auto nxt = statechart::next_state(n_model, n, rec.event.name);
        if (nxt)
            CHECK(rec.n_after == *nxt);
        else
            CHECK(rec.n_after == n);
        n = rec.n_after;
    }
}

}  // namespace

TEST_SUITE_BEGIN("devices");

TEST_CASE("builtin machines equal the shipped model documents") {
    CHECK(light_bulb_original() ==
          parse_machine(read_file(repo_file("models/lightbulb_original.json"))));
    CHECK(light_bulb_evolved() ==
          parse_machine(read_file(repo_file("models/lightbulb_evolved.json"))));
    CHECK(cleaning_robot_original() ==
          parse_machine(read_file(repo_file("models/robot_original.json"))));
    CHECK(cleaning_robot_evolved() ==
          parse_machine(read_file(repo_file("models/robot_evolved.json"))));
}

TEST_CASE("virtual clock: fires in (time, generation) order and honors cancel") {
    VirtualClock vc;
    std::vector<std::string> ran;
    vc.schedule(200, [&] { ran.push_back("late"); });
    TimerId a = vc.schedule(100, [&] { ran.push_back("a"); });
    vc.schedule(100, [&] { ran.push_back("b"); });
    TimerId dead = vc.schedule(150, [&] { ran.push_back("dead"); });
    (void)a;
    vc.cancel(dead);

    REQUIRE(vc.has_pending());
    CHECK(vc.next_fire_ms() == 100);
    vc.fire_next();
    CHECK(vc.now_ms() == 100);
    vc.fire_next();
    CHECK(ran == std::vector<std::string>{"a", "b"});  // generation breaks the tie
    CHECK(vc.next_fire_ms() == 200);                   // the cancelled 150 is skipped
    vc.fire_next();
    CHECK(ran == std::vector<std::string>{"a", "b", "late"});
    CHECK_FALSE(vc.has_pending());

    // Time never decreases; callbacks may schedule more work.
    vc.set_now(50);
    CHECK(vc.now_ms() == 200);
    vc.schedule(10, [&] { vc.schedule(5, [&] { ran.push_back("chained"); }); });
    vc.fire_next();
    REQUIRE(vc.has_pending());
    CHECK(vc.next_fire_ms() == 215);
    vc.fire_next();
    CHECK(ran.back() == "chained");
}

TEST_CASE("light bulb device: switch toggles, unknown events are ignored but logged") {
    VirtualClock vc;
    SimulatedDevice dev = light_bulb_device();
    dev.attach(&vc, {});
    CHECK(dev.state() == "off");

    dev.receive("switch");
    CHECK(dev.state() == "on");
    dev.receive("switch");
    CHECK(dev.state() == "off");

    vc.set_now(42);
    dev.receive("timeout");  // not an E_o event: ignored, still logged
    CHECK(dev.state() == "off");
    REQUIRE(dev.effect_log().size() == 3);
    CHECK(dev.effect_log()[2] == "t=42 recv=timeout state=off");
    CHECK_FALSE(vc.has_pending());  // the bulb never emits
}

TEST_CASE("robot device: spot dwell emits endSpot which folds it back to on") {
    VirtualClock vc;
    SimulatedDevice dev = cleaning_robot_device(1000);
    // Standalone wiring: feed emissions straight back to the device.
    SimulatedDevice* self = &dev;
    dev.attach(&vc, [self](const std::string& e) { self->receive(e); });

    dev.receive("clean");
    CHECK(dev.state() == "on");
    dev.receive("clean");
    CHECK(dev.state() == "clean");
    dev.receive("clean");
    CHECK(dev.state() == "on");

    vc.set_now(100);
    dev.receive("spot");
    CHECK(dev.state() == "spot");
    REQUIRE(vc.has_pending());
    CHECK(vc.next_fire_ms() == 1100);
    vc.fire_next();
    CHECK(dev.state() == "on");  // emitted endSpot, then took (spot, endSpot) -> on
    CHECK_FALSE(vc.has_pending());

    std::string log = dev.render_log();
    CHECK(log.find("t=1100 emit=endSpot") != std::string::npos);
    CHECK(log.find("t=1100 recv=endSpot state=on") != std::string::npos);
    check_device_log_truthful(dev.machine(), log);
}

TEST_CASE("robot device: leaving spot before the dwell cancels the emission") {
    VirtualClock vc;
    SimulatedDevice dev = cleaning_robot_device(1000);
    dev.attach(&vc, [](const std::string&) { FAIL("no emission expected"); });
    dev.receive("clean");
    dev.receive("spot");
    REQUIRE(vc.has_pending());
    vc.set_now(400);
    dev.receive("endSpot");  // spot -> on before the dwell elapses
    CHECK(dev.state() == "on");
    CHECK_FALSE(vc.has_pending());
}

TEST_CASE("builtin handlers: robot move enqueues arriveSpot after its travel time") {
    VirtualClock vc;
    mapek::EventQueue q;
    mapek::HandlerRegistry reg = builtin_handlers("robot");
    mapek::HandlerContext ctx;
    ctx.enqueue = [&](const std::string& name, mapek::Source src) {
        return q.enqueue(name, src);
    };
    ctx.scheduler = &vc;

    vc.set_now(250);
    reg.at("move")(ctx);
    CHECK(q.depth() == 0);  // nothing until the travel completes
    REQUIRE(vc.has_pending());
    CHECK(vc.next_fire_ms() == 750);  // default 500 ms
    vc.fire_next();
    auto e = q.try_dequeue();
    REQUIRE(e.has_value());
    CHECK(e->name == "arriveSpot");
    CHECK(e->source == mapek::Source::Internal);

    // spotWait is passive: no schedules, no enqueues.
    reg.at("spotWait")(ctx);
    CHECK(q.depth() == 0);
    CHECK_FALSE(vc.has_pending());
}

TEST_CASE("builtin handlers: configurable travel time and the bulb's color flag") {
    VirtualClock vc;
    mapek::EventQueue q;
    HandlerConfig cfg;
    cfg.move_duration_ms = 125;
    mapek::HandlerContext ctx;
    ctx.enqueue = [&](const std::string& name, mapek::Source src) {
        return q.enqueue(name, src);
    };
    ctx.scheduler = &vc;
    builtin_handlers("robot", cfg).at("move")(ctx);
    CHECK(vc.next_fire_ms() == 125);

    std::map<std::string, std::string> flags;
    ctx.flags = &flags;
    mapek::HandlerRegistry bulb = builtin_handlers("lightbulb");
    bulb.at("wait")(ctx);
    CHECK(flags.empty());
    bulb.at("incandescentOn")(ctx);
    CHECK(flags.at("color") == "incandescent");

    CHECK_THROWS_AS(builtin_handlers("toaster"), UnknownDeviceKind);
}

TEST_CASE("builtin_handlers_for covers known new states and rejects strangers") {
    auto reg = builtin_handlers_for({"move", "spotWait"});
    CHECK(reg.has("move"));
    CHECK(reg.has("spotWait"));
    auto bulb = builtin_handlers_for({"incandescentOn", "wait"});
    CHECK(bulb.has("wait"));
    CHECK_THROWS_AS(builtin_handlers_for({"zorp"}), UnknownDeviceKind);
}

TEST_CASE("script parsing: directives, comments and monotone timestamps") {
    auto s = scenario::parse_script(
        "# warm-up\n"
        "at 0 clean\n"
        "\n"
        "at 1000 spot\n"
        "advance 3000\n");
    REQUIRE(s.steps.size() == 3);
    CHECK(std::get<scenario::ScriptAt>(s.steps[0]).event == "clean");
    CHECK(std::get<scenario::ScriptAt>(s.steps[1]).at_ms == 1000);
    CHECK(std::get<scenario::ScriptAdvance>(s.steps[2]).to_ms == 3000);

    CHECK_THROWS_WITH_AS(scenario::parse_script("at 100 a\nat 50 b\n"),
                         doctest::Contains("nondecreasing"), std::runtime_error);
    CHECK_THROWS_WITH_AS(scenario::parse_script("launch 5 x\n"),
                         doctest::Contains("line 1"), std::runtime_error);
    CHECK_THROWS_WITH_AS(scenario::parse_script("at x clean\n"),
                         doctest::Contains("expected"), std::runtime_error);
    CHECK_THROWS_WITH_AS(scenario::parse_script("at 5 clean extra\n"),
                         doctest::Contains("trailing"), std::runtime_error);
    CHECK_THROWS_WITH_AS(scenario::parse_script("advance -3\n"),
                         doctest::Contains("negative"), std::runtime_error);
}

TEST_CASE("scenario: spot-cleaning request walks move and back (first log)") {
    auto res = scenario::run_scenario(robot_pair(), cleaning_robot_device(),
                                      script_at({{0, "clean"}, {1000, "spot"}}),
                                      builtin_handlers("robot"));

    using mapek::Mode;
    using mapek::Source;
    std::vector<Line> want = {
        {"clean", Source::Controller, Mode::Existing, {"clean"}, "", "on", "on"},
        {"spot", Source::Controller, Mode::New, {}, "move", "on", "move"},
        {"arriveSpot", Source::Internal, Mode::Existing, {"spot"}, "", "spot", "spot"},
        {"endSpot", Source::Device, Mode::Existing, {"endSpot"}, "", "on", "on"},
    };
    CHECK(lines_of(res) == want);
    CHECK(res.final_o == "on");
    CHECK(res.final_n == "on");
    CHECK(res.sink_events == std::vector<std::string>{"clean", "spot", "endSpot"});
    CHECK(res.device_log ==
          "t=0 recv=clean state=on\n"
          "t=1500 recv=spot state=spot\n"
          "t=2500 emit=endSpot\n"
          "t=2500 recv=endSpot state=on\n");
    for (std::size_t i = 0; i < res.records.size(); ++i)
        CHECK(res.records[i].event.seq == i + 1);
    check_device_log_truthful(cleaning_robot_original(), res.device_log);
    check_evolved_fold(cleaning_robot_evolved(), res);
}

TEST_CASE("scenario: repeated clean requests detour through spotWait (second log)") {
    auto res = scenario::run_scenario(
        robot_pair(), cleaning_robot_device(),
        script_at({{0, "clean"}, {1000, "clean"}, {2000, "clean"}, {2500, "clean"}}),
        builtin_handlers("robot"));

    using mapek::Mode;
    using mapek::Source;
    std::vector<Line> want = {
        {"clean", Source::Controller, Mode::Existing, {"clean"}, "", "on", "on"},
        {"clean", Source::Controller, Mode::Existing, {"clean"}, "", "clean", "clean"},
        {"clean", Source::Controller, Mode::New, {}, "spotWait", "clean", "spotWait"},
        {"clean", Source::Controller, Mode::Existing, {"clean", "spot"}, "", "spot",
         "spot"},
        {"endSpot", Source::Device, Mode::Existing, {"endSpot"}, "", "on", "on"},
    };
    CHECK(lines_of(res) == want);
    CHECK(res.final_o == "on");
    CHECK(res.final_n == "on");
    CHECK(res.device_log ==
          "t=0 recv=clean state=on\n"
          "t=1000 recv=clean state=clean\n"
          "t=2500 recv=clean state=on\n"
          "t=2500 recv=spot state=spot\n"
          "t=3500 emit=endSpot\n"
          "t=3500 recv=endSpot state=on\n");
    // The spotWait timer (2000+3000=5000) was cancelled at 2500: no timeout
    // event ever enters the trace.
    for (const auto& rec : res.records) CHECK(rec.event.name != "timeout");
    check_device_log_truthful(cleaning_robot_original(), res.device_log);
    check_evolved_fold(cleaning_robot_evolved(), res);
}

TEST_CASE("scenario: the spotWait timeout path folds back to on") {
    auto res = scenario::run_scenario(
        robot_pair(), cleaning_robot_device(),
        script_at({{0, "clean"}, {1000, "clean"}, {2000, "clean"}}),
        builtin_handlers("robot"));

    REQUIRE(res.records.size() == 4);
    CHECK(res.records[2].mode == mapek::Mode::New);
    CHECK(res.records[3].event.name == "timeout");
    CHECK(res.records[3].event.source == mapek::Source::Internal);
    CHECK(res.records[3].action.events == std::vector<std::string>{"clean"});
    CHECK(res.final_o == "on");
    CHECK(res.final_n == "on");
    // The timer fired 3000 ms after spotWait was entered at t=2000.
    CHECK(res.device_log.find("t=5000 recv=clean state=on") != std::string::npos);
    check_evolved_fold(cleaning_robot_evolved(), res);
}

TEST_CASE("scenario: bulb timeout branch turns itself off (timeout path)") {
    scenario::ScenarioScript s =
        script_at({{0, "switch"}, {500, "switch"}});
    s.steps.push_back(scenario::ScriptAdvance{3000});
    auto res = scenario::run_scenario(bulb_pair(), light_bulb_device(), s,
                                      builtin_handlers("lightbulb"));

    using mapek::Mode;
    using mapek::Source;
    std::vector<Line> want = {
        {"switch", Source::Controller, Mode::Existing, {"switch"}, "", "on", "on"},
        {"switch", Source::Controller, Mode::New, {}, "wait", "on", "wait"},
        {"timeout", Source::Internal, Mode::Existing, {"switch"}, "", "off", "off"},
    };
    CHECK(lines_of(res) == want);
    CHECK(res.final_o == "off");
    CHECK(res.final_n == "off");
    CHECK(res.flags.empty());
    check_device_log_truthful(light_bulb_original(), res.device_log);
    check_evolved_fold(light_bulb_evolved(), res);
}

TEST_CASE("scenario: a third switch beats the timer and lights incandescent") {
    auto res = scenario::run_scenario(
        bulb_pair(), light_bulb_device(),
        script_at({{0, "switch"}, {500, "switch"}, {1000, "switch"}}),
        builtin_handlers("lightbulb"));

    REQUIRE(res.records.size() == 3);
    CHECK(res.records[2].mode == mapek::Mode::New);
    CHECK(res.records[2].action.handler == "incandescentOn");
    CHECK(res.final_o == "on");
    CHECK(res.final_n == "incandescentOn");
    CHECK(res.flags.at("color") == "incandescent");
    // Leaving wait cancelled the 2 s timer: no timeout record anywhere.
    for (const auto& rec : res.records) CHECK(rec.event.name != "timeout");
    check_evolved_fold(light_bulb_evolved(), res);
}

TEST_CASE("scenario: identical scripts yield byte-identical output") {
    auto script =
        script_at({{0, "clean"}, {1000, "clean"}, {2000, "clean"}, {2500, "clean"}});
    auto a = scenario::run_scenario(robot_pair(), cleaning_robot_device(), script,
                                    builtin_handlers("robot"));
    auto b = scenario::run_scenario(robot_pair(), cleaning_robot_device(), script,
                                    builtin_handlers("robot"));
    CHECK(a.trace_text == b.trace_text);
    CHECK(a.device_log == b.device_log);
    CHECK(a.trace_text.find("seq=1\tevent=clean\tsrc=controller\tmode=existing") == 0);
}

TEST_CASE("scenario: random robot scripts stay deterministic and conformant") {
    std::mt19937 rng(99);
    std::vector<std::string> events = {"clean", "spot",    "endSpot",
                                       "arriveSpot", "timeout", "bogus"};
    for (int iter = 0; iter < 20; ++iter) {
        std::uniform_int_distribution<int> len(1, 12), gap(0, 1500),
            pick(0, static_cast<int>(events.size()) - 1);
        std::vector<std::pair<std::int64_t, std::string>> evs;
        std::int64_t t = 0;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            t += gap(rng);
            evs.push_back({t, events[pick(rng)]});
        }
        auto script = script_at(evs);
        auto a = scenario::run_scenario(robot_pair(), cleaning_robot_device(), script,
                                        builtin_handlers("robot"));
        auto b = scenario::run_scenario(robot_pair(), cleaning_robot_device(), script,
                                        builtin_handlers("robot"));
        CHECK(a.trace_text == b.trace_text);
        CHECK(a.device_log == b.device_log);
        check_device_log_truthful(cleaning_robot_original(), a.device_log);
        check_evolved_fold(cleaning_robot_evolved(), a);
    }
}

TEST_CASE("scenario: device/pair mismatch and runaway scripts are errors") {
    CHECK_THROWS_AS(scenario::run_scenario(robot_pair(), light_bulb_device(),
                                           script_at({{0, "clean"}}),
                                           builtin_handlers("robot")),
                    scenario::ScenarioError);
    CHECK_THROWS_WITH_AS(
        scenario::run_scenario(robot_pair(), cleaning_robot_device(),
                               script_at({{0, "clean"}, {10, "spot"}}),
                               builtin_handlers("robot"), 2),
        doctest::Contains("step cap"), scenario::ScenarioError);
}

TEST_SUITE_END();
