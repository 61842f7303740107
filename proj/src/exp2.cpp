#include "evolve/exp2.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace evolve::ctmc {

namespace {

// Sweep means arrive as doubles (CLI flags); rates stay exact: round to
// nanosecond resolution, reduce, and take the reciprocal.
Rational rate_from_mean_seconds(double mean) {
    if (!(mean > 0) || !std::isfinite(mean))
        throw std::invalid_argument("converter mean must be a positive number");
    auto num = static_cast<std::int64_t>(std::llround(mean * 1e9));
    if (num <= 0) throw std::invalid_argument("converter mean too small");
    Rational as_rational{num, 1000000000};
    return Rational{as_rational.den(), as_rational.num()};
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

Exp2Table run_exp2(const Exp2Config& cfg) {
    if (cfg.t_max < 0) throw std::invalid_argument("t_max must be >= 0");
    if (cfg.t_max > 0 && !(cfg.t_step > 0))
        throw std::invalid_argument("t_step must be > 0");
    std::vector<double> Ts{0.0};
    if (cfg.t_step > 0)
        for (int i = 1; i * cfg.t_step <= cfg.t_max + 1e-9; ++i)
            Ts.push_back(i * cfg.t_step);

    struct Cell {
        std::string model;
        double conv_mean_s;
        std::uint64_t id;  // fixed per-cell stream key for the simulator
        GuardedModel gm;
        int st_max;
    };
    std::vector<Cell> cells;
    if (cfg.include_baseline) {
        Exp2Params p;
        p.emb_lost_rate = cfg.emb_lost_rate;
        cells.push_back({"baseline", -1.0, 0, baseline_model(p), p.st_max});
    }
    std::uint64_t next_id = 1;
    for (double mean : cfg.conv_means) {
        Exp2Params p;
        p.emb_lost_rate = cfg.emb_lost_rate;
        p.conv_internal_process = rate_from_mean_seconds(mean);
        cells.push_back({"proposed", mean, next_id++, proposed_model(p), p.st_max});
    }

    Exp2Table out;
    for (const Cell& cell : cells) {
        ExplicitCtmc mc = build_explicit(cell.gm);
        std::vector<char> mask(mc.state_count(), 0);
        for (int i : mc.states_where(cell.gm, "emb_st", cell.st_max)) mask[i] = 1;
        StatePred pred = [mask](int i) { return mask[i] != 0; };

        GridResult g = transient_grid(mc, Ts, pred, cfg.eps, cfg.kernel);
        for (std::size_t i = 0; i < Ts.size(); ++i) {
            out.rows.push_back({cell.model, cell.conv_mean_s, Ts[i], g.reach[i],
                                g.lost[i], 0.0, 0.0, "uniformization"});
            out.max_norm_error =
                std::max(out.max_norm_error, std::abs(1.0 - g.dist_sum[i]));
        }
        if (cfg.runs > 0) {
            auto sims = simulate(mc, Ts, pred, cfg.runs, cfg.seed, cell.id, cfg.kernel);
            for (std::size_t i = 0; i < Ts.size(); ++i)
                out.rows.push_back({cell.model, cell.conv_mean_s, Ts[i],
                                    sims[i].reach_mean, sims[i].lost_mean,
                                    sims[i].reach_se, sims[i].lost_se, "simulation"});
        }
    }
    return out;
}

static const char* kHeader =
    "model,conv_mean_s,T,reach_prob,expected_lost,reach_se,lost_se,method";

std::string to_csv(const Exp2Table& t) {
    std::string s = kHeader;
    s += '\n';
    for (const Exp2Row& r : t.rows) {
        s += r.model;
        s += ',';
        s += r.conv_mean_s < 0 ? "-" : fmt(r.conv_mean_s);
        s += ',';
        s += fmt(r.T);
        s += ',';
        s += fmt(r.reach_prob);
        s += ',';
        s += fmt(r.expected_lost);
        s += ',';
        s += fmt(r.reach_se);
        s += ',';
        s += fmt(r.lost_se);
        s += ',';
        s += r.method;
        s += '\n';
    }
    return s;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s, int lineno, const char* what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("exp2 csv line " + std::to_string(lineno) +
                                 ": bad " + what + " '" + s + "'");
    }
}

}  // namespace

Exp2Table from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw std::runtime_error("exp2 csv: missing or unexpected header");
    Exp2Table t;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 8)
            throw std::runtime_error("exp2 csv line " + std::to_string(lineno) +
                                     ": expected 8 fields, got " +
                                     std::to_string(f.size()));
        Exp2Row r;
        r.model = f[0];
        r.conv_mean_s = f[1] == "-" ? -1.0 : parse_num(f[1], lineno, "conv_mean_s");
        r.T = parse_num(f[2], lineno, "T");
        r.reach_prob = parse_num(f[3], lineno, "reach_prob");
        r.expected_lost = parse_num(f[4], lineno, "expected_lost");
        r.reach_se = parse_num(f[5], lineno, "reach_se");
        r.lost_se = parse_num(f[6], lineno, "lost_se");
        r.method = f[7];
        if (r.method != "uniformization" && r.method != "simulation")
            throw std::runtime_error("exp2 csv line " + std::to_string(lineno) +
                                     ": unknown method '" + r.method + "'");
        t.rows.push_back(std::move(r));
    }
    return t;
}

Exp2Verdicts check_exp2(const Exp2Table& t) {
    // Numerical slack for the nonstrict orderings: uniformization results
    // carry the eps truncation error.
    constexpr double kSlack = 1e-9;
    using CurveKey = std::pair<std::string, double>;  // model, conv mean
    std::map<CurveKey, std::map<double, const Exp2Row*>> uni;
    std::map<std::tuple<std::string, double, double>, const Exp2Row*> sim;
    for (const Exp2Row& r : t.rows) {
        if (r.method == "uniformization")
            uni[{r.model, r.conv_mean_s}][r.T] = &r;
        else
            sim[{r.model, r.conv_mean_s, r.T}] = &r;
    }

    Exp2Verdicts v;
    v.reach_monotone_in_T = true;
    v.speed_dominance = true;
    v.loss_ordering_at_100 = true;
    v.agreement = true;
    auto fail = [&](bool& flag, std::string msg) {
        flag = false;
        v.failures.push_back(std::move(msg));
    };

    for (const auto& [key, curve] : uni) {
        const Exp2Row* prev = nullptr;
        for (const auto& [T, row] : curve) {
            if (prev && row->reach_prob + kSlack < prev->reach_prob)
                fail(v.reach_monotone_in_T,
                     "monotone: " + key.first + " conv=" + fmt(key.second) +
                         ": reach decreases " + fmt(prev->reach_prob) + " -> " +
                         fmt(row->reach_prob) + " between T=" + fmt(prev->T) +
                         " and T=" + fmt(T));
            prev = row;
        }
    }

    std::vector<CurveKey> proposed;
    for (const auto& [key, curve] : uni)
        if (key.first == "proposed") proposed.push_back(key);
    for (std::size_t i = 1; i < proposed.size(); ++i) {
        const auto& fastc = uni[proposed[i - 1]];  // smaller mean = faster
        const auto& slowc = uni[proposed[i]];
        for (const auto& [T, frow] : fastc) {
            auto it = slowc.find(T);
            if (it == slowc.end()) continue;
            const Exp2Row* srow = it->second;
            if (srow->reach_prob > frow->reach_prob + kSlack)
                fail(v.speed_dominance,
                     "dominance: reach at T=" + fmt(T) + ": conv=" +
                         fmt(proposed[i].second) + " (" + fmt(srow->reach_prob) +
                         ") exceeds conv=" + fmt(proposed[i - 1].second) + " (" +
                         fmt(frow->reach_prob) + ")");
            if (srow->expected_lost + kSlack < frow->expected_lost)
                fail(v.speed_dominance,
                     "dominance: lost at T=" + fmt(T) + ": conv=" +
                         fmt(proposed[i].second) + " (" + fmt(srow->expected_lost) +
                         ") below conv=" + fmt(proposed[i - 1].second) + " (" +
                         fmt(frow->expected_lost) + ")");
        }
    }

    auto base = uni.find({"baseline", -1.0});
    if (base != uni.end()) {
        auto base100 = base->second.find(100.0);
        if (base100 != base->second.end()) {
            for (double conv : {0.25, 0.5, 0.75}) {
                auto curve = uni.find({"proposed", conv});
                if (curve == uni.end()) continue;
                auto p100 = curve->second.find(100.0);
                if (p100 == curve->second.end()) continue;
                if (!(p100->second->expected_lost <
                      base100->second->expected_lost))
                    fail(v.loss_ordering_at_100,
                         "loss@100: proposed conv=" + fmt(conv) + " (" +
                             fmt(p100->second->expected_lost) +
                             ") not strictly below baseline (" +
                             fmt(base100->second->expected_lost) + ")");
            }
        }
    }

    for (const auto& [key, srow] : sim) {
        auto curve = uni.find({std::get<0>(key), std::get<1>(key)});
        if (curve == uni.end()) continue;
        auto urow = curve->second.find(std::get<2>(key));
        if (urow == curve->second.end()) continue;
        double dr = std::abs(urow->second->reach_prob - srow->reach_prob);
        double dl = std::abs(urow->second->expected_lost - srow->expected_lost);
        std::string where = std::get<0>(key) +
                            (std::get<1>(key) < 0
                                 ? std::string()
                                 : " conv=" + fmt(std::get<1>(key))) +
                            " T=" + fmt(std::get<2>(key));
        if (dr > 3.0 * srow->reach_se)
            fail(v.agreement, "agreement: reach at " + where + ": |" +
                                  fmt(urow->second->reach_prob) + " - " +
                                  fmt(srow->reach_prob) + "| > 3*" +
                                  fmt(srow->reach_se));
        if (dl > 3.0 * srow->lost_se)
            fail(v.agreement, "agreement: lost at " + where + ": |" +
                                  fmt(urow->second->expected_lost) + " - " +
                                  fmt(srow->expected_lost) + "| > 3*" +
                                  fmt(srow->lost_se));
    }
    return v;
}

}  // namespace evolve::ctmc
