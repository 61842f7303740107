#include "evolve/statechart.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

#include "json.hpp"

namespace evolve::statechart {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool valid_token(const std::string& t) {
    if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0]))) return false;
    return std::all_of(t.begin() + 1, t.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

void require_token(const std::string& t, const char* what) {
    if (!valid_token(t))
        throw InvariantError(std::string(what) + " '" + t +
                             "' must match [A-Za-z][A-Za-z0-9_]*");
}

// 1-based line/column of a byte offset in doc.
std::pair<int, int> offset_to_pos(const std::string& doc, std::size_t offset) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < doc.size(); ++i) {
        if (doc[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Best-effort position of a key or value token for schema errors: the DOM
// has no positions, so point at the first occurrence of its quoted text.
std::pair<int, int> locate(const std::string& doc, const std::string& token) {
    auto at = doc.find("\"" + token + "\"");
    if (at == std::string::npos) return {0, 0};
    return offset_to_pos(doc, at);
}

[[noreturn]] void syntax_at(const std::string& doc, const std::string& token,
                            const std::string& msg) {
    auto [line, col] = locate(doc, token);
    std::ostringstream os;
    os << msg;
    if (line > 0) os << " (line " << line << ", column " << col << ")";
    throw SyntaxError(os.str(), line, col);
}

void reject_unknown_keys(const std::string& doc, const json& obj,
                         std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end()) {
            syntax_at(doc, key,
                      std::string("unknown field \"") + key + "\" in " + where);
        }
    }
}

const json& require_field(const std::string& doc, const json& obj, const char* key,
                          const char* where) {
    auto it = obj.find(key);
    if (it == obj.end())
        syntax_at(doc, key, std::string("missing field \"") + key + "\" in " + where);
    return *it;
}

std::string require_string(const std::string& doc, const json& v, const char* key,
                           const char* where) {
    if (!v.is_string())
        syntax_at(doc, key,
                  std::string("field \"") + key + "\" in " + where + " must be a string");
    return v.get<std::string>();
}

}  // namespace

StateMachine::StateMachine(std::string name, StateName initial,
                           std::set<EventName> events, std::set<StateName> states,
                           std::vector<Transition> transitions,
                           std::vector<TimeoutSpec> timeouts)
    : name_(std::move(name)),
      initial_(std::move(initial)),
      events_(std::move(events)),
      states_(std::move(states)),
      transitions_(std::move(transitions)),
      timeouts_(std::move(timeouts)) {
    require_token(name_, "machine name");
    for (const auto& s : states_) require_token(s, "state name");
    for (const auto& e : events_) require_token(e, "event name");

    if (!states_.count(initial_))
        throw InvariantError("initial state '" + initial_ + "' is not a declared state");

    for (const auto& t : transitions_) {
        if (!states_.count(t.from))
            throw InvariantError("transition source '" + t.from + "' is not a declared state");
        if (!states_.count(t.to))
            throw InvariantError("transition target '" + t.to + "' is not a declared state");
        if (!events_.count(t.event))
            throw InvariantError("transition event '" + t.event + "' is not a declared event");
        auto key = std::make_pair(t.from, t.event);
        if (!table_.emplace(key, t.to).second)
            throw InvariantError("duplicate transition for (from, event) = (" + t.from +
                                 ", " + t.event + ")");
    }
    std::sort(transitions_.begin(), transitions_.end());
    for (const auto& t : transitions_) outgoing_[t.from].push_back(t);
    for (auto& [_, out] : outgoing_)
        std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) {
            return std::tie(a.event, a.to) < std::tie(b.event, b.to);
        });

    std::set<StateName> with_timeout;
    for (const auto& ts : timeouts_) {
        if (!states_.count(ts.state))
            throw InvariantError("timeout on '" + ts.state + "', which is not a declared state");
        if (ts.delay_ms <= 0)
            throw InvariantError("timeout delay on '" + ts.state + "' must be positive");
        if (!events_.count(ts.emits))
            throw InvariantError("timeout event '" + ts.emits + "' is not a declared event");
        if (!with_timeout.insert(ts.state).second)
            throw InvariantError("state '" + ts.state + "' has more than one timeout");
        if (!table_.count({ts.state, ts.emits}))
            throw InvariantError("timeout on '" + ts.state + "' emits '" + ts.emits +
                                 "' but no transition (" + ts.state + ", " + ts.emits +
                                 ") exists");
    }
    std::sort(timeouts_.begin(), timeouts_.end());
}

std::optional<TimeoutSpec> StateMachine::timeout_for(const StateName& s) const {
    for (const auto& ts : timeouts_)
        if (ts.state == s) return ts;
    return std::nullopt;
}

const std::vector<Transition>& StateMachine::outgoing(const StateName& s) const {
    static const std::vector<Transition> kNone;
    auto it = outgoing_.find(s);
    return it == outgoing_.end() ? kNone : it->second;
}

StateMachine parse_machine(const std::string& doc) {
    json j;
    try {
        j = json::parse(doc);
    } catch (const json::parse_error& e) {
        auto [line, col] = offset_to_pos(doc, e.byte > 0 ? e.byte - 1 : 0);
        std::ostringstream os;
        os << "malformed JSON at line " << line << ", column " << col;
        throw SyntaxError(os.str(), line, col);
    }
    if (!j.is_object()) throw SyntaxError("machine document must be a JSON object", 1, 1);

    reject_unknown_keys(doc, j, {"name", "initial", "events", "states", "transitions"},
                        "machine document");
    std::string name =
        require_string(doc, require_field(doc, j, "name", "machine document"), "name",
                       "machine document");
    std::string initial =
        require_string(doc, require_field(doc, j, "initial", "machine document"),
                       "initial", "machine document");

    const json& jevents = require_field(doc, j, "events", "machine document");
    if (!jevents.is_array()) syntax_at(doc, "events", "field \"events\" must be an array");
    std::set<EventName> events;
    for (const auto& e : jevents) {
        std::string ev = require_string(doc, e, "events", "events list");
        if (!events.insert(ev).second)
            throw InvariantError("duplicate event name '" + ev + "'");
    }

    const json& jstates = require_field(doc, j, "states", "machine document");
    if (!jstates.is_array()) syntax_at(doc, "states", "field \"states\" must be an array");
    std::set<StateName> states;
    std::vector<TimeoutSpec> timeouts;
    for (const auto& s : jstates) {
        if (!s.is_object()) syntax_at(doc, "states", "states entries must be objects");
        reject_unknown_keys(doc, s, {"name", "timeout_ms", "timeout_event"},
                            "state entry");
        std::string sn = require_string(doc, require_field(doc, s, "name", "state entry"),
                                        "name", "state entry");
        if (!states.insert(sn).second)
            throw InvariantError("duplicate state name '" + sn + "'");
        bool has_ms = s.contains("timeout_ms"), has_ev = s.contains("timeout_event");
        if (has_ms != has_ev)
            syntax_at(doc, sn,
                      "state \"" + sn + "\" must have timeout_ms and timeout_event together");
        if (has_ms) {
            if (!s["timeout_ms"].is_number_integer())
                syntax_at(doc, "timeout_ms", "field \"timeout_ms\" must be an integer");
            TimeoutSpec ts;
            ts.state = sn;
            ts.delay_ms = s["timeout_ms"].get<std::int64_t>();
            ts.emits = require_string(doc, s["timeout_event"], "timeout_event", "state entry");
            timeouts.push_back(std::move(ts));
        }
    }

    const json& jtrans = require_field(doc, j, "transitions", "machine document");
    if (!jtrans.is_array())
        syntax_at(doc, "transitions", "field \"transitions\" must be an array");
    std::vector<Transition> transitions;
    for (const auto& t : jtrans) {
        if (!t.is_object())
            syntax_at(doc, "transitions", "transitions entries must be objects");
        reject_unknown_keys(doc, t, {"from", "event", "to"}, "transition entry");
        Transition tr;
        tr.from = require_string(doc, require_field(doc, t, "from", "transition entry"),
                                 "from", "transition entry");
        tr.event = require_string(doc, require_field(doc, t, "event", "transition entry"),
                                  "event", "transition entry");
        tr.to = require_string(doc, require_field(doc, t, "to", "transition entry"), "to",
                               "transition entry");
        transitions.push_back(std::move(tr));
    }

    return StateMachine(std::move(name), std::move(initial), std::move(events),
                        std::move(states), std::move(transitions), std::move(timeouts));
}

std::string serialize_machine(const StateMachine& m) {
    ordered_json j;
    j["name"] = m.name();
    j["initial"] = m.initial();
    j["events"] = m.events();  // std::set: already sorted
    ordered_json states = ordered_json::array();
    for (const auto& s : m.states()) {
        ordered_json st;
        st["name"] = s;
        if (auto ts = m.timeout_for(s)) {
            st["timeout_ms"] = ts->delay_ms;
            st["timeout_event"] = ts->emits;
        }
        states.push_back(std::move(st));
    }
    j["states"] = std::move(states);
    ordered_json trans = ordered_json::array();
    for (const auto& t : m.transitions()) {  // sorted by (from, event, to)
        ordered_json tr;
        tr["from"] = t.from;
        tr["event"] = t.event;
        tr["to"] = t.to;
        trans.push_back(std::move(tr));
    }
    j["transitions"] = std::move(trans);
    return j.dump(2) + "\n";
}

bool exists_state(const StateMachine& m, const StateName& s) {
    return m.states().count(s) > 0;
}

bool exists_transition(const StateMachine& m, const StateName& s, const EventName& e) {
    return m.table_.count({s, e}) > 0;
}

std::optional<StateName> next_state(const StateMachine& m, const StateName& s,
                                    const EventName& e) {
    auto it = m.table_.find({s, e});
    if (it == m.table_.end()) return std::nullopt;
    return it->second;
}

std::vector<EventName> event_path(const StateMachine& m, const StateName& from,
                                  const StateName& to) {
    if (!exists_state(m, from))
        throw InvariantError("event_path source '" + from + "' is not a state");
    if (!exists_state(m, to))
        throw InvariantError("event_path target '" + to + "' is not a state");
    if (from == to) return {};

    // Breadth-first, expanding each state's transitions in (event, to)
    // order; first visit wins. This yields the lexicographically least
    // (event, target)-sequence among all shortest paths.
    std::map<StateName, std::pair<StateName, EventName>> parent;
    std::deque<StateName> frontier{from};
    std::set<StateName> seen{from};
    while (!frontier.empty()) {
        StateName cur = frontier.front();
        frontier.pop_front();
        for (const auto& t : m.outgoing(cur)) {
            if (seen.count(t.to)) continue;
            seen.insert(t.to);
            parent[t.to] = {cur, t.event};
            if (t.to == to) {
                std::vector<EventName> path;
                StateName walk = to;
                while (walk != from) {
                    auto& [prev, ev] = parent[walk];
                    path.push_back(ev);
                    walk = prev;
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            frontier.push_back(t.to);
        }
    }
    throw Unreachable(from, to);
}

std::vector<Diagnostic> validate_machine(const StateMachine& m) {
    std::vector<Diagnostic> out;

    std::set<StateName> reachable{m.initial()};
    std::deque<StateName> frontier{m.initial()};
    while (!frontier.empty()) {
        StateName cur = frontier.front();
        frontier.pop_front();
        for (const auto& t : m.outgoing(cur))
            if (reachable.insert(t.to).second) frontier.push_back(t.to);
    }
    for (const auto& s : m.states()) {
        if (!reachable.count(s))
            out.push_back({Diagnostic::Kind::unreachable_state, s,
                           "state '" + s + "' is unreachable from initial"});
        if (m.outgoing(s).empty())
            out.push_back({Diagnostic::Kind::terminal_state, s,
                           "state '" + s + "' has no outgoing transitions"});
    }
    // Unreachable through parse_machine, but hand-assembled machines pass
    // through here too.
    for (const auto& ts : m.timeouts()) {
        if (!exists_transition(m, ts.state, ts.emits))
            out.push_back({Diagnostic::Kind::dead_timer, ts.state,
                           "timer on '" + ts.state + "' emits '" + ts.emits +
                               "' which never fires there"});
    }
    return out;
}

}  // namespace evolve::statechart
