#include <fstream>
#include <random>
#include <sstream>

#include "common/gen.hpp"
#include "doctest.h"
#include "evolve/evolution.hpp"
#include "json.hpp"

using namespace evolve::evolution;
using evolve::statechart::parse_machine;
using evolve::statechart::StateMachine;
using evolve::statechart::Transition;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

StateMachine fixture(const std::string& rel) {
    return parse_machine(read_file(std::string(EVOLVE_REPO_ROOT) + "/" + rel));
}

EvolutionPair bulb_pair() {
    return {fixture("models/lightbulb_original.json"),
            fixture("models/lightbulb_evolved.json")};
}

EvolutionPair robot_pair() {
    return {fixture("models/robot_original.json"), fixture("models/robot_evolved.json")};
}

// Rebuild a machine with one state surgically removed (and its
// transitions dropped) — an evolution-condition violation factory.
StateMachine drop_state(const StateMachine& m, const std::string& victim) {
    std::set<std::string> states = m.states();
    states.erase(victim);
    std::vector<Transition> trans;
    for (const auto& t : m.transitions())
        if (t.from != victim && t.to != victim) trans.push_back(t);
    return StateMachine(m.name(), m.initial(), m.events(), states, trans, {});
}

}  // namespace

TEST_SUITE_BEGIN("evolution");

TEST_CASE("both bundled pairs satisfy the evolution conditions") {
    for (const auto& p : {bulb_pair(), robot_pair()}) {
        ConditionReport r = check_conditions(p);
        CHECK(r.condition1_holds);
        CHECK(r.condition2_holds);
        CHECK(r.missing_events.empty());
        CHECK(r.missing_states.empty());
    }
}

TEST_CASE("a deleted original state fails condition 2 with a witness") {
    EvolutionPair p = bulb_pair();
    p.evolved = drop_state(p.evolved, "on");
    ConditionReport r = check_conditions(p);
    CHECK(r.condition1_holds);
    CHECK_FALSE(r.condition2_holds);
    CHECK(r.missing_states == std::set<std::string>{"on"});
}

TEST_CASE("light bulb diff matches the documented evolution") {
    EvolutionDiff d = diff(bulb_pair());
    CHECK(d.new_states == std::set<std::string>{"incandescentOn", "wait"});
    CHECK(d.new_events == std::set<std::string>{"timeout"});
    REQUIRE(d.modified_transitions.size() == 1);
    CHECK(d.modified_transitions[0].from == "on");
    CHECK(d.modified_transitions[0].event == "switch");
    CHECK(d.modified_transitions[0].old_to == "off");
    CHECK(d.modified_transitions[0].new_to == "wait");
    CHECK(d.removed_transitions.empty());
}

TEST_CASE("robot diff matches the documented evolution") {
    EvolutionDiff d = diff(robot_pair());
    CHECK(d.new_states == std::set<std::string>{"move", "spotWait"});
    CHECK(d.new_events == std::set<std::string>{"arriveSpot", "timeout"});
    CHECK(d.modified_transitions.size() == 2);  // (on,spot) and (clean,clean)
    CHECK(d.retained_transitions.size() == 3);
    CHECK(d.added_transitions.size() == 3);
    CHECK(d.removed_transitions.empty());
}

TEST_CASE("identical pair diffs to retained-only") {
    StateMachine m = fixture("models/robot_original.json");
    EvolutionDiff d = diff({m, m});
    CHECK(d.new_states.empty());
    CHECK(d.new_events.empty());
    CHECK(d.added_transitions.empty());
    CHECK(d.modified_transitions.empty());
    CHECK(d.removed_transitions.empty());
    CHECK(d.retained_transitions.size() == m.transitions().size());
}

TEST_CASE("diff on a violating pair throws with the report attached") {
    EvolutionPair p = bulb_pair();
    p.evolved = drop_state(p.evolved, "on");
    try {
        diff(p);
        FAIL("expected ConditionsViolated");
    } catch (const ConditionsViolated& e) {
        CHECK(e.report.missing_states == std::set<std::string>{"on"});
    }
}

TEST_CASE("gate accepts the bundled pairs and rejects constructed hazards") {
    CHECK_NOTHROW(gate_for_runtime(bulb_pair()));
    CHECK_NOTHROW(gate_for_runtime(robot_pair()));

    // Unreachable new state: evolved adds a state nothing enters.
    EvolutionPair p = bulb_pair();
    std::set<std::string> states = p.evolved.states();
    states.insert("island");
    p.evolved = StateMachine(p.evolved.name(), p.evolved.initial(), p.evolved.events(),
                             states, p.evolved.transitions(), p.evolved.timeouts());
    try {
        gate_for_runtime(p);
        FAIL("expected UnreachableStates");
    } catch (const UnreachableStates& e) {
        CHECK(e.states == std::vector<std::string>{"island"});
    }

    // Condition-1 violation travels through the gate.
    EvolutionPair q = bulb_pair();
    q.original = StateMachine("bulb", "off", {"switch", "extra"}, q.original.states(),
                              q.original.transitions(), {});
    CHECK_THROWS_AS(gate_for_runtime(q), ConditionsViolated);
}

TEST_CASE("conditions are monotone under evolved-side growth") {
    std::mt19937 rng(23);
    for (int i = 0; i < 50; ++i) {
        StateMachine o = testgen::random_machine(rng, 6, 4);
        StateMachine n = testgen::evolve_machine(rng, o);
        ConditionReport before = check_conditions({o, n});
        REQUIRE(before.ok());  // evolve_machine preserves states/events

        // Grow the evolved machine further: conditions must keep holding.
        StateMachine n2 = testgen::evolve_machine(rng, n);
        CHECK(check_conditions({o, n2}).ok());
    }
}

TEST_CASE("diff buckets partition both transition sets (random pairs)") {
    std::mt19937 rng(29);
    for (int i = 0; i < 100; ++i) {
        StateMachine o = testgen::random_machine(rng, 6, 4);
        StateMachine n = testgen::evolve_machine(rng, o);
        EvolutionDiff d = diff({o, n});

        // Every evolved transition in exactly one of retained/added/modified.
        CHECK(d.retained_transitions.size() + d.added_transitions.size() +
                  d.modified_transitions.size() ==
              n.transitions().size());
        // Every original transition accounted for: retained + modified + removed.
        CHECK(d.retained_transitions.size() + d.modified_transitions.size() +
                  d.removed_transitions.size() ==
              o.transitions().size());
        // New states never intersect S_o.
        for (const auto& s : d.new_states) CHECK_FALSE(o.states().count(s));
    }
}

TEST_CASE("report and diff serialize with sorted sets") {
    EvolutionDiff d = diff(robot_pair());
    auto j = nlohmann::json::parse(diff_to_json(d));
    CHECK(j["new_states"] == nlohmann::json({"move", "spotWait"}));
    CHECK(j["new_events"] == nlohmann::json({"arriveSpot", "timeout"}));

    ConditionReport r = check_conditions(robot_pair());
    auto jr = nlohmann::json::parse(report_to_json(r));
    CHECK(jr["condition1_holds"] == true);
    CHECK(jr["condition2_holds"] == true);
}

TEST_SUITE_END();
