#include "evolve/ctmc.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace evolve::ctmc {

int GuardedModel::var_index(const std::string& n) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == n) return static_cast<int>(i);
    throw std::out_of_range("no variable named '" + n + "'");
}

Valuation GuardedModel::initial() const {
    Valuation v;
    for (const auto& d : vars) v.push_back(d.init);
    return v;
}

GuardedModel proposed_model(const Exp2Params& p) {
    GuardedModel m;
    m.name = "proposed";
    m.modules = {"Converter", "EmbeddedSystem"};
    m.vars = {
        {"arrived", 0, 1, 0, true},
        {"conv_st", 1, p.st_max, 1, false},
        {"emb_controlled", 0, 1, 0, true},
        {"lost", 0, 1, 0, true},
        {"emb_st", 1, p.st_max, 1, false},
    };
    const int arrived = 0, conv_st = 1, emb_controlled = 2, lost = 3, emb_st = 4;
    using K = Assign::Kind;

    // Converter: an event arrives; a second arrival while one is held is
    // lost; controlling hands the event to the embedded system.
    m.commands.push_back({"arrived", 0, {{arrived, 0}}, p.event_arrive,
                          {{arrived, K::Set, 1}}});
    m.commands.push_back({"conv_lost", 0, {{arrived, 1}}, p.event_arrive,
                          {{arrived, K::Set, 1}}});
    m.commands.push_back({"control", 0, {{arrived, 1}}, p.conv_internal_process,
                          {{conv_st, K::IncClamp, p.st_max}, {arrived, K::Set, 0}}});

    // EmbeddedSystem: receiving control while idle starts an action; while
    // busy it marks a loss; processing finishes the action.
    m.commands.push_back({"control", 1, {{emb_controlled, 0}}, Rational{1},
                          {{emb_controlled, K::Set, 1}}});
    m.commands.push_back({"control", 1, {{emb_controlled, 1}}, Rational{1},
                          {{lost, K::Set, 1}}});
    m.commands.push_back({"emb_lost", 1, {{lost, 1}}, p.emb_lost_rate,
                          {{lost, K::Set, 0}}});
    m.commands.push_back({"process", 1, {{emb_controlled, 1}}, p.emb_internal_process,
                          {{emb_st, K::IncClamp, p.st_max},
                           {emb_controlled, K::Set, 0},
                           {lost, K::Set, 0}}});

    m.rewards = {{"conv_lost", Rational{1}}, {"emb_lost", Rational{1}}};
    return m;
}

GuardedModel baseline_model(const Exp2Params& p) {
    GuardedModel m;
    m.name = "baseline";
    m.modules = {"EmbeddedSystem"};
    m.vars = {
        {"emb_controlled", 0, 1, 0, true},
        {"emb_st", 1, p.st_max, 1, false},
    };
    const int emb_controlled = 0, emb_st = 1;
    using K = Assign::Kind;

    // Events arrive directly; an arrival during processing is lost on the
    // spot (a rewarded self-loop), and processing advances the state path.
    m.commands.push_back({"arrived", 0, {{emb_controlled, 0}}, p.event_arrive,
                          {{emb_controlled, K::Set, 1}}});
    m.commands.push_back({"lost", 0, {{emb_controlled, 1}}, p.event_arrive, {}});
    m.commands.push_back({"process", 0, {{emb_controlled, 1}}, p.emb_internal_process,
                          {{emb_st, K::IncClamp, p.st_max},
                           {emb_controlled, K::Set, 0}}});

    m.rewards = {{"lost", Rational{1}}};
    return m;
}

namespace {

bool guard_holds(const std::vector<Cmp>& guard, const Valuation& v) {
    for (const auto& c : guard)
        if (v[c.var] != c.value) return false;
    return true;
}

Valuation apply_updates(const GuardedModel& m, const std::vector<Assign>& updates,
                        Valuation v) {
    for (const auto& u : updates) {
        const VarDecl& d = m.vars[u.var];
        int nv = u.kind == Assign::Kind::Set ? u.value : std::min(v[u.var] + 1, u.value);
        if (nv < d.lo || nv > d.hi)
            throw DomainOverflow("update drives '" + d.name + "' to " +
                                 std::to_string(nv) + ", outside [" +
                                 std::to_string(d.lo) + ", " + std::to_string(d.hi) +
                                 "]");
        v[u.var] = nv;
    }
    return v;
}

}  // namespace

double ExplicitCtmc::max_exit_rate() const {
    double mx = 0;
    for (double e : exits_) mx = std::max(mx, e);
    return mx;
}

std::vector<int> ExplicitCtmc::states_where(const GuardedModel& m, const std::string& var,
                                            int value) const {
    int vi = m.var_index(var);
    std::vector<int> out;
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i][vi] == value) out.push_back(static_cast<int>(i));
    return out;
}

ExplicitCtmc build_explicit(const GuardedModel& m) {
    // Reward per label (labels without a reward pay 0).
    std::map<std::string, Rational> reward_of;
    for (const auto& [label, value] : m.rewards) reward_of.emplace(label, value);

    // Group commands by label; a label is synchronized across every module
    // that mentions it. Sorted label order keeps enumeration deterministic.
    std::map<std::string, std::map<int, std::vector<const Command*>>> by_label;
    std::vector<const Command*> unlabeled;
    for (const auto& c : m.commands) {
        if (c.label)
            by_label[*c.label][c.module].push_back(&c);
        else
            unlabeled.push_back(&c);
    }

    struct Fired {
        Valuation to;
        Rational rate;
        Rational reward;
    };

    auto fired_from = [&](const Valuation& v) {
        std::vector<Fired> out;
        for (const Command* c : unlabeled)
            if (guard_holds(c->guard, v))
                out.push_back({apply_updates(m, c->updates, v), c->rate, Rational{0}});

        for (const auto& [label, participants] : by_label) {
            Rational reward =
                reward_of.count(label) ? reward_of.at(label) : Rational{0};
            // One enabled command per participating module; a module with
            // none blocks the label. Enumerate the cross product.
            std::vector<std::vector<const Command*>> choices;
            bool blocked = false;
            for (const auto& [module, cmds] : participants) {
                std::vector<const Command*> enabled;
                for (const Command* c : cmds)
                    if (guard_holds(c->guard, v)) enabled.push_back(c);
                if (enabled.empty()) {
                    blocked = true;
                    break;
                }
                choices.push_back(std::move(enabled));
            }
            if (blocked) continue;

            std::vector<std::size_t> pick(choices.size(), 0);
            for (;;) {
                Valuation to = v;
                Rational rate{1};
                for (std::size_t i = 0; i < choices.size(); ++i) {
                    const Command* c = choices[i][pick[i]];
                    to = apply_updates(m, c->updates, std::move(to));
                    rate = rate * c->rate;
                }
                out.push_back({std::move(to), rate, reward});

                std::size_t i = 0;
                while (i < pick.size() && ++pick[i] == choices[i].size())
                    pick[i++] = 0;
                if (i == pick.size()) break;
            }
        }
        return out;
    };

    ExplicitCtmc mc;
    std::map<Valuation, int> index;
    std::deque<int> frontier;
    auto intern = [&](const Valuation& v) {
        auto [it, fresh] = index.emplace(v, static_cast<int>(mc.states_.size()));
        if (fresh) {
            mc.states_.push_back(v);
            frontier.push_back(it->second);
        }
        return it->second;
    };

    mc.initial_ = intern(m.initial());
    while (!frontier.empty()) {
        int si = frontier.front();
        frontier.pop_front();
        // The jump table keeps one entry per composed firing (rewards stay
        // per-firing); growth via intern() may reallocate, so resolve the
        // state lazily.
        std::vector<Jump> js;
        for (const auto& f : fired_from(mc.states_[si])) {
            if (!f.rate.positive())
                throw DomainOverflow("command fires with non-positive rate " +
                                     f.rate.str());
            int ti = intern(f.to);
            js.push_back({ti, f.rate.value(), f.reward.value()});
        }
        if (static_cast<int>(mc.jumps_.size()) <= si) mc.jumps_.resize(si + 1);
        mc.jumps_[si] = std::move(js);
    }

    const std::size_t n = mc.states_.size();
    mc.jumps_.resize(n);
    mc.rows_.assign(n, {});
    mc.exits_.assign(n, 0.0);
    mc.jump_exit_.assign(n, 0.0);
    mc.reward_rates_.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, double> row;  // off-diagonal, parallel edges summed
        for (const auto& j : mc.jumps_[i]) {
            mc.jump_exit_[i] += j.rate;
            mc.reward_rates_[i] += j.rate * j.reward;
            if (j.to != static_cast<int>(i)) row[j.to] += j.rate;
        }
        for (const auto& [to, rate] : row) {
            mc.rows_[i].push_back({to, rate, 0.0});
            mc.exits_[i] += rate;
        }
    }

    mc.cols_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& j : mc.rows_[i])
            mc.cols_[j.to].push_back({static_cast<int>(i), j.rate, 0.0});

    return mc;
}

}  // namespace evolve::ctmc
