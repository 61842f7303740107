// Independent oracles, written against the documented semantics rather
// than the implementation:
//   * shortest lex-least event paths via distance relaxation + greedy
//     reconstruction (no breadth-first queue),
//   * a definitional brute-force sequence enumerator for tiny instances,
//   * a literal Algorithm-1 interpreter (the converter's conformance
//     reference) with the two documented deviations.
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evolve/statechart.hpp"

namespace oracles {

using evolve::statechart::EventName;
using evolve::statechart::StateMachine;
using evolve::statechart::StateName;
using evolve::statechart::Transition;

// --- shortest-path oracle ------------------------------------------------

// Distances to `to` by Bellman-style relaxation over the full transition
// list (|S| sweeps reach a fixed point), then a greedy walk that picks the
// lexicographically least (event, target) among distance-decreasing
// transitions. Among all shortest paths, the greedy choice is exactly the
// lexicographically least (event, target)-sequence.
inline std::optional<std::vector<EventName>> shortest_lex_path(const StateMachine& m,
                                                               const StateName& from,
                                                               const StateName& to) {
    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::map<StateName, int> dist;
    for (const auto& s : m.states()) dist[s] = kInf;
    dist[to] = 0;
    for (std::size_t sweep = 0; sweep < m.states().size(); ++sweep) {
        bool changed = false;
        for (const auto& t : m.transitions()) {
            if (dist[t.to] + 1 < dist[t.from]) {
                dist[t.from] = dist[t.to] + 1;
                changed = true;
            }
        }
        if (!changed) break;
    }
    if (dist[from] >= kInf) return std::nullopt;

    std::vector<EventName> path;
    StateName cur = from;
    while (cur != to) {
        const Transition* best = nullptr;
        for (const auto& t : m.transitions()) {
            if (t.from != cur || dist[t.to] != dist[cur] - 1) continue;
            if (!best || std::tie(t.event, t.to) < std::tie(best->event, best->to))
                best = &t;
        }
        path.push_back(best->event);
        cur = best->to;
    }
    return path;
}

// --- definitional enumerator (tiny instances only) ------------------------

// First event sequence, in (length, lexicographic) order, whose fold over
// the machine's partial transition function reaches `to`. Exponential;
// used to cross-check shortest_lex_path on machines with a handful of
// states.
inline std::optional<std::vector<EventName>> enumerate_first_path(
    const StateMachine& m, const StateName& from, const StateName& to, int max_len) {
    std::vector<EventName> events(m.events().begin(), m.events().end());  // sorted
    std::vector<EventName> seq;

    // Depth-first in lex order at a fixed target length = lex order over
    // all length-L sequences.
    std::function<bool(const StateName&, int)> walk = [&](const StateName& cur,
                                                          int remaining) {
        if (remaining == 0) return cur == to;
        for (const auto& e : events) {
            auto nxt = evolve::statechart::next_state(m, cur, e);
            if (!nxt) continue;
            seq.push_back(e);
            if (walk(*nxt, remaining - 1)) return true;
            seq.pop_back();
        }
        return false;
    };

    for (int len = 0; len <= max_len; ++len) {
        seq.clear();
        if (walk(from, len)) return seq;
    }
    return std::nullopt;
}

// --- reference step interpreter --------------------------------------

// One converter decision, transcribed from the algorithm: reject when the
// evolved model has no transition; otherwise classify by whether the
// target is an original state. Carries the two documented deviations:
// the original state advances to the plan's target (not a single
// getNextState step), and when the incoming event itself reaches the
// target in the original model the plan is that event verbatim.
struct RefStep {
    enum class Mode { Existing, New, Rejected } mode;
    std::vector<EventName> sent;  // empty unless Existing
    std::string handler;          // target state name when Mode::New
    StateName o_after, n_after;
    bool plan_failed = false;
};

inline RefStep reference_step(const StateMachine& o_model, const StateMachine& n_model,
                              const StateName& o_state, const StateName& n_state,
                              const EventName& event) {
    RefStep r;
    r.o_after = o_state;
    r.n_after = n_state;
    if (!evolve::statechart::exists_transition(n_model, n_state, event)) {
        r.mode = RefStep::Mode::Rejected;  // line 13: nextAction = none
        return r;
    }
    StateName tgt = *evolve::statechart::next_state(n_model, n_state, event);
    if (o_model.states().count(tgt)) {
        r.mode = RefStep::Mode::Existing;
        auto direct = evolve::statechart::next_state(o_model, o_state, event);
        if (direct && *direct == tgt) {
            r.sent = {event};  // "event_b = event_a"
        } else {
            auto path = shortest_lex_path(o_model, o_state, tgt);
            if (!path) {
                r.mode = RefStep::Mode::Rejected;  // degraded: no route
                r.plan_failed = true;
                return r;
            }
            r.sent = *path;
        }
        r.o_after = tgt;
        r.n_after = tgt;
    } else {
        r.mode = RefStep::Mode::New;  // line 11: registered new function
        r.handler = tgt;
        r.n_after = tgt;  // original state untouched
    }
    return r;
}

}  // namespace oracles
