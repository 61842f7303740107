#include "evolve/evolution.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"

namespace evolve::evolution {

namespace {

std::string witness_list(const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) {
        if (!out.empty()) out += ", ";
        out += x;
    }
    return out;
}

}  // namespace

ConditionsViolated::ConditionsViolated(ConditionReport r)
    : GateError("evolution conditions violated: missing events {" + witness_list(r.missing_events) +
                "}, missing states {" + witness_list(r.missing_states) + "}"),
      report(std::move(r)) {}

UnreachableStates::UnreachableStates(std::vector<StateName> s)
    : GateError([&] {
          std::string msg = "evolved model has unreachable states:";
          for (const auto& x : s) msg += " " + x;
          return msg;
      }()),
      states(std::move(s)) {}

ConditionReport check_conditions(const EvolutionPair& p) {
    ConditionReport r;
    // E_o ∩ E_n = E_o and S_o ∩ S_n = S_o, checked as subset inclusion
    // with witnesses for every missing element.
    for (const auto& e : p.original.events())
        if (!p.evolved.events().count(e)) r.missing_events.insert(e);
    for (const auto& s : p.original.states())
        if (!p.evolved.states().count(s)) r.missing_states.insert(s);
    r.condition1_holds = r.missing_events.empty();
    r.condition2_holds = r.missing_states.empty();
    return r;
}

EvolutionDiff diff(const EvolutionPair& p) {
    ConditionReport report = check_conditions(p);
    if (!report.ok()) throw ConditionsViolated(std::move(report));

    EvolutionDiff d;
    for (const auto& s : p.evolved.states())
        if (!p.original.states().count(s)) d.new_states.insert(s);
    for (const auto& e : p.evolved.events())
        if (!p.original.events().count(e)) d.new_events.insert(e);

    std::map<std::pair<StateName, EventName>, StateName> original_table;
    for (const auto& t : p.original.transitions())
        original_table[{t.from, t.event}] = t.to;

    std::map<std::pair<StateName, EventName>, StateName> evolved_table;
    for (const auto& t : p.evolved.transitions())
        evolved_table[{t.from, t.event}] = t.to;

    for (const auto& t : p.evolved.transitions()) {
        auto it = original_table.find({t.from, t.event});
        if (it == original_table.end())
            d.added_transitions.push_back(t);
        else if (it->second == t.to)
            d.retained_transitions.push_back(t);
        else
            d.modified_transitions.push_back({t.from, t.event, it->second, t.to});
    }
    for (const auto& t : p.original.transitions())
        if (!evolved_table.count({t.from, t.event})) d.removed_transitions.push_back(t);

    return d;
}

ValidatedPair gate_for_runtime(const EvolutionPair& p) {
    EvolutionDiff d = diff(p);  // throws ConditionsViolated first

    // Reachability hazard: a new state no event sequence can enter could
    // never host a function.
    std::vector<StateName> unreachable;
    for (const auto& diag : statechart::validate_machine(p.evolved))
        if (diag.kind == statechart::Diagnostic::Kind::unreachable_state)
            unreachable.push_back(diag.state);
    if (!unreachable.empty()) throw UnreachableStates(std::move(unreachable));

    // Recorded assumption (not paper-mandated): both current-state
    // pointers start aligned.
    if (p.original.initial() != p.evolved.initial())
        throw GateError("initial states differ: original '" + p.original.initial() +
                        "' vs evolved '" + p.evolved.initial() + "'");

    auto body = std::make_shared<ValidatedPair::Body>(ValidatedPair::Body{p, std::move(d)});
    return ValidatedPair(std::move(body));
}

std::string report_to_json(const ConditionReport& r) {
    nlohmann::ordered_json j;
    j["condition1_holds"] = r.condition1_holds;
    j["condition2_holds"] = r.condition2_holds;
    j["missing_events"] = r.missing_events;
    j["missing_states"] = r.missing_states;
    return j.dump(2);
}

std::string diff_to_json(const EvolutionDiff& d) {
    nlohmann::ordered_json j;
    j["new_states"] = d.new_states;
    j["new_events"] = d.new_events;
    auto transitions = [](const std::vector<Transition>& ts) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& t : ts)
            arr.push_back({{"from", t.from}, {"event", t.event}, {"to", t.to}});
        return arr;
    };
    j["retained_transitions"] = transitions(d.retained_transitions);
    j["added_transitions"] = transitions(d.added_transitions);
    nlohmann::ordered_json mods = nlohmann::ordered_json::array();
    for (const auto& m : d.modified_transitions)
        mods.push_back({{"from", m.from},
                        {"event", m.event},
                        {"old_to", m.old_to},
                        {"new_to", m.new_to}});
    j["modified_transitions"] = std::move(mods);
    j["removed_transitions"] = transitions(d.removed_transitions);
    return j.dump(2);
}

}  // namespace evolve::evolution
