// Guarded-command CTMC models (synchronizing modules, rate products,
// transition rewards) and their explicit-state compilation. Expressive
// enough for the two Exp.-2 models; a general modeling-language parser is
// an explicit non-goal.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evolve/rational.hpp"

namespace evolve::ctmc {

// Finite integer domain [lo, hi]; booleans are [0, 1].
struct VarDecl {
    std::string name;
    int lo = 0;
    int hi = 0;
    int init = 0;
    bool is_bool = false;
};

using Valuation = std::vector<int>;  // indexed like GuardedModel::vars

// Conjunction member: variable == value.
struct Cmp {
    int var;
    int value;
};

// Either set a constant or increment with an explicit upper clamp
// (min(x + 1, clamp) — the only update forms the models use).
struct Assign {
    enum class Kind { Set, IncClamp };
    int var;
    Kind kind = Kind::Set;
    int value = 0;  // Set: new value; IncClamp: clamp bound
};

struct Command {
    std::optional<std::string> label;  // synchronized when present
    int module = 0;
    std::vector<Cmp> guard;      // conjunction; empty = true
    Rational rate{1};            // unlabeled/unspecified rate = 1
    std::vector<Assign> updates;
};

struct GuardedModel {
    std::string name;
    std::vector<std::string> modules;
    std::vector<VarDecl> vars;
    std::vector<Command> commands;
    // Transition rewards: every firing of a command with this label pays
    // the value (self-loops included).
    std::vector<std::pair<std::string, Rational>> rewards;

    int var_index(const std::string& n) const;
    Valuation initial() const;
};

struct Exp2Params {
    int st_max = 20;
    Rational event_arrive{1, 2};
    Rational emb_internal_process{1, 1};
    Rational conv_internal_process{4, 1};  // one of 1/0.25, 1/0.5, 1/0.75, 1/1
    Rational emb_lost_rate{1, 1};          // unspecified in the source model
};

// Converter + EmbeddedSystem modules with the "lost" rewards on
// [conv_lost] and [emb_lost].
GuardedModel proposed_model(const Exp2Params& p);

// Reconstruction of the unconverted system: the embedded module alone,
// arrivals at event_arrive, and an arrival during processing pays the
// lost reward directly.
GuardedModel baseline_model(const Exp2Params& p);

struct DomainOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One resolved jump of the explicit chain. Self-loops never enter the
// rate matrix but do appear in the jump table with their rewards (the
// simulator must fire them; the reward-rate vector accounts for them).
struct Jump {
    int to;
    double rate;
    double reward;
};

class ExplicitCtmc {
public:
    std::size_t state_count() const { return states_.size(); }
    int initial() const { return initial_; }
    const std::vector<Valuation>& states() const { return states_; }
    const Valuation& state(int i) const { return states_[i]; }

    // Off-diagonal rate matrix rows (parallel edges already summed).
    const std::vector<std::vector<Jump>>& rows() const { return rows_; }
    // Incoming edges per state — the transposed view the uniformization
    // kernel multiplies by.
    const std::vector<std::vector<Jump>>& columns() const { return cols_; }

    // Full jump tables including rewarded self-loops (simulation view).
    const std::vector<std::vector<Jump>>& jumps() const { return jumps_; }
    const std::vector<double>& jump_exit() const { return jump_exit_; }

    double exit_rate(int i) const { return exits_[i]; }
    const std::vector<double>& exit_rates() const { return exits_; }
    // rho(i): sum over enabled rewarded firings of rate * reward.
    const std::vector<double>& reward_rates() const { return reward_rates_; }

    double max_exit_rate() const;

    // Predicate helper over the named variable.
    std::vector<int> states_where(const GuardedModel& m, const std::string& var,
                                  int value) const;

private:
    std::vector<Valuation> states_;
    int initial_ = 0;
    std::vector<std::vector<Jump>> rows_, cols_, jumps_;
    std::vector<double> exits_, jump_exit_, reward_rates_;

    friend ExplicitCtmc build_explicit(const GuardedModel& m);
};

// Breadth-first reachability from the initial valuation; synchronized
// commands compose by label across all modules whose alphabet contains it
// (rates multiply, a silent module blocks the label); parallel
// same-source/target rates sum. Throws DomainOverflow when a Set update
// leaves a variable's domain.
ExplicitCtmc build_explicit(const GuardedModel& m);

}  // namespace evolve::ctmc
