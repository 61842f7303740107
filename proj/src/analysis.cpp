#include "evolve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evolve::ctmc {

Kernel default_kernel() {
#ifdef _OPENMP
    return Kernel::OpenMP;
#else
    return Kernel::Serial;
#endif
}

namespace {

double log_poisson(double lambda_t, std::int64_t k) {
    return -lambda_t + static_cast<double>(k) * std::log(lambda_t) -
           std::lgamma(static_cast<double>(k) + 1.0);
}

double poisson_weight(double T, double lambda, std::int64_t k) {
    if (T <= 0) return k == 0 ? 1.0 : 0.0;
    return std::exp(log_poisson(lambda * T, k));
}

// One uniformized-kernel step: out = in * P with
// P(i,j) = rate(i,j)/Lambda off-diagonal, P(j,j) = 1 - exit(j)/Lambda.
// The transposed (incoming-edge) layout gives each output element exactly
// one owner, so the parallel loop is race-free and, with the same inner
// summation order, bitwise identical to the serial reference.
void kernel_step_serial(const ExplicitCtmc& mc, double lambda,
                        const std::vector<double>& in, std::vector<double>& out) {
    const auto& cols = mc.columns();
    const auto& exits = mc.exit_rates();
    const std::int64_t n = static_cast<std::int64_t>(in.size());
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = in[j] * (1.0 - exits[j] / lambda);
        for (const Jump& e : cols[j]) acc += in[e.to] * (e.rate / lambda);
        out[j] = acc;
    }
}

void kernel_step_omp(const ExplicitCtmc& mc, double lambda,
                     const std::vector<double>& in, std::vector<double>& out) {
#ifdef _OPENMP
    const auto& cols = mc.columns();
    const auto& exits = mc.exit_rates();
    const std::int64_t n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = in[j] * (1.0 - exits[j] / lambda);
        for (const Jump& e : cols[j]) acc += in[e.to] * (e.rate / lambda);
        out[j] = acc;
    }
#else
    kernel_step_serial(mc, lambda, in, out);
#endif
}

void kernel_step(Kernel k, const ExplicitCtmc& mc, double lambda,
                 const std::vector<double>& in, std::vector<double>& out) {
    if (k == Kernel::OpenMP)
        kernel_step_omp(mc, lambda, in, out);
    else
        kernel_step_serial(mc, lambda, in, out);
}

std::int64_t iteration_cap(double lambda, double t_max) {
    double lt = lambda * t_max;
    return static_cast<std::int64_t>(lt + 60.0 * std::sqrt(lt + 1.0) + 200.0);
}

}  // namespace

TransientResult transient(const ExplicitCtmc& mc, double T, double eps, Kernel kernel) {
    const std::size_t n = mc.state_count();
    TransientResult res;
    res.T = T;
    res.dist.assign(n, 0.0);

    const double lambda = 1.02 * mc.max_exit_rate();
    if (T <= 0 || lambda <= 0) {
        res.dist[mc.initial()] = 1.0;
        return res;
    }

    std::vector<double> pi(n, 0.0), nxt(n, 0.0);
    pi[mc.initial()] = 1.0;
    double cum = 0.0;
    const std::int64_t cap = iteration_cap(lambda, T);
    for (std::int64_t k = 0; k <= cap; ++k) {
        double w = poisson_weight(T, lambda, k);
        if (w > 0)
            for (std::size_t j = 0; j < n; ++j) res.dist[j] += w * pi[j];
        cum += w;
        if (cum >= 1.0 - eps) break;
        kernel_step(kernel, mc, lambda, pi, nxt);
        pi.swap(nxt);
    }
    res.trunc_error = std::max(0.0, 1.0 - cum);
    return res;
}

double reach_probability(const ExplicitCtmc& mc, const StatePred& pred, double T,
                         double eps, Kernel kernel) {
    TransientResult r = transient(mc, T, eps, kernel);
    double p = 0.0;
    for (std::size_t i = 0; i < r.dist.size(); ++i)
        if (pred(static_cast<int>(i))) p += r.dist[i];
    return p;
}

GridResult transient_grid(const ExplicitCtmc& mc, std::span<const double> Ts,
                          const StatePred& pred, double eps, Kernel kernel) {
    const std::size_t n = mc.state_count();
    const std::size_t m = Ts.size();
    GridResult res;
    res.T.assign(Ts.begin(), Ts.end());
    res.reach.assign(m, 0.0);
    res.lost.assign(m, 0.0);
    res.dist_sum.assign(m, 0.0);

    std::vector<char> in_pred(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (pred(static_cast<int>(i))) in_pred[i] = 1;
    const auto& rho = mc.reward_rates();
    double rho_max = 0.0;
    for (double r : rho) rho_max = std::max(rho_max, r);

    const double lambda = 1.02 * mc.max_exit_rate();
    if (m == 0) return res;
    if (lambda <= 0) {
        // No rate-matrix transitions: the distribution is frozen at the
        // initial state; rewarded self-loops still accrue linearly.
        for (std::size_t i = 0; i < m; ++i) {
            res.reach[i] = in_pred[mc.initial()] ? 1.0 : 0.0;
            res.lost[i] = rho[mc.initial()] * Ts[i];
            res.dist_sum[i] = 1.0;
        }
        return res;
    }

    double t_max = *std::max_element(Ts.begin(), Ts.end());
    std::vector<double> pi(n, 0.0), nxt(n, 0.0);
    pi[mc.initial()] = 1.0;
    std::vector<double> cum(m, 0.0);     // Poisson mass through k, per T
    std::vector<double> weight(m, 0.0);  // accumulated Erlang-tail weight, per T

    const std::int64_t cap = iteration_cap(lambda, t_max);
    double worst_tail = 1.0;
    for (std::int64_t k = 0; k <= cap; ++k) {
        double sigma = 0.0, rho_pi = 0.0, pi_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_pred[j]) sigma += pi[j];
            rho_pi += rho[j] * pi[j];
            pi_sum += pi[j];
        }

        bool done = true;
        worst_tail = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double w = poisson_weight(Ts[i], lambda, k);
            cum[i] += w;
            res.reach[i] += w * sigma;
            res.dist_sum[i] += w * pi_sum;
            // integral of the k-th Poisson density over [0, T]:
            // (1/Lambda)(1 - C_k), C_k the cdf through k.
            double erlang_tail = (1.0 - cum[i]) / lambda;
            if (erlang_tail > 0) res.lost[i] += erlang_tail * rho_pi;
            weight[i] += erlang_tail;

            double dist_tail = 1.0 - cum[i];
            double reward_tail = (Ts[i] - weight[i]) * rho_max;
            worst_tail = std::max(worst_tail, dist_tail);
            if (dist_tail > eps ||
                reward_tail > eps * std::max(1.0, rho_max * Ts[i]))
                done = false;
        }
        if (done) break;
        kernel_step(kernel, mc, lambda, pi, nxt);
        pi.swap(nxt);
    }
    res.trunc_error = std::max(0.0, worst_tail);
    return res;
}

double expected_lost(const ExplicitCtmc& mc, double T, double eps, Kernel kernel) {
    const double Ts[1] = {T};
    return transient_grid(mc, Ts, [](int) { return false; }, eps, kernel).lost[0];
}

namespace {

std::uint64_t scramble(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t run) {
    std::uint64_t h = scramble(seed ^ scramble(cell + 1));
    return scramble(h ^ scramble(run + 0x632BE59BD9B4E019ULL));
}

double uniform01(std::mt19937_64& rng) {
    // (0, 1]: safe as a log argument.
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// One exact-jump trajectory, recording the pred indicator and cumulated
// reward at every grid time. Grid times must be sorted ascending.
void run_one(const ExplicitCtmc& mc, std::span<const double> Ts,
             const std::vector<char>& in_pred, std::mt19937_64& rng,
             std::vector<char>& hit, std::vector<double>& lost_at) {
    const auto& jumps = mc.jumps();
    const auto& jump_exit = mc.jump_exit();
    const std::size_t m = Ts.size();
    int state = mc.initial();
    double t = 0.0, lost = 0.0;
    std::size_t idx = 0;
    while (idx < m) {
        double exit = jump_exit[state];
        if (exit <= 0) break;  // absorbing: the remaining grid sees this state
        double tn = t - std::log(uniform01(rng)) / exit;
        while (idx < m && Ts[idx] < tn) {
            hit[idx] = in_pred[state];
            lost_at[idx] = lost;
            ++idx;
        }
        if (idx >= m) return;
        double v = uniform01(rng) * exit;
        const auto& row = jumps[state];
        double c = 0.0;
        const Jump* chosen = &row.back();
        for (const Jump& j : row) {
            c += j.rate;
            if (v <= c) {
                chosen = &j;
                break;
            }
        }
        lost += chosen->reward;
        state = chosen->to;
        t = tn;
    }
    for (; idx < m; ++idx) {
        hit[idx] = in_pred[state];
        lost_at[idx] = lost;
    }
}

}  // namespace

std::vector<SimEstimate> simulate(const ExplicitCtmc& mc, std::span<const double> Ts,
                                  const StatePred& pred, std::uint64_t runs,
                                  std::uint64_t seed, std::uint64_t cell,
                                  Kernel kernel) {
    const std::size_t n = mc.state_count();
    const std::size_t m = Ts.size();
    for (std::size_t i = 1; i < m; ++i)
        if (Ts[i] < Ts[i - 1])
            throw std::invalid_argument("simulation grid must be sorted ascending");
    if (runs < 1) throw std::invalid_argument("simulate requires runs >= 1");

    std::vector<char> in_pred(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (pred(static_cast<int>(i))) in_pred[i] = 1;

    // Fixed-size blocks with per-block partial sums, combined in block
    // order: the reduction is bitwise independent of thread count, and the
    // serial kernel walks the identical structure.
    constexpr std::uint64_t kBlock = 1024;
    const std::uint64_t nblocks = (runs + kBlock - 1) / kBlock;
    struct Partial {
        std::vector<double> r, r2, l, l2;
    };
    std::vector<Partial> partials(nblocks);

    auto do_block = [&](std::uint64_t b) {
        Partial p;
        p.r.assign(m, 0.0);
        p.r2.assign(m, 0.0);
        p.l.assign(m, 0.0);
        p.l2.assign(m, 0.0);
        std::vector<char> hit(m, 0);
        std::vector<double> lost_at(m, 0.0);
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(runs, lo + kBlock);
        for (std::uint64_t r = lo; r < hi; ++r) {
            std::mt19937_64 rng(mix_seed(seed, cell, r));
            run_one(mc, Ts, in_pred, rng, hit, lost_at);
            for (std::size_t i = 0; i < m; ++i) {
                double x = hit[i] ? 1.0 : 0.0;
                p.r[i] += x;
                p.r2[i] += x;  // x^2 == x for an indicator
                p.l[i] += lost_at[i];
                p.l2[i] += lost_at[i] * lost_at[i];
            }
        }
        partials[b] = std::move(p);
    };

    if (kernel == Kernel::OpenMP) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b)
            do_block(static_cast<std::uint64_t>(b));
#else
        for (std::uint64_t b = 0; b < nblocks; ++b) do_block(b);
#endif
    } else {
        for (std::uint64_t b = 0; b < nblocks; ++b) do_block(b);
    }

    std::vector<double> sr(m, 0.0), sr2(m, 0.0), sl(m, 0.0), sl2(m, 0.0);
    for (std::uint64_t b = 0; b < nblocks; ++b)
        for (std::size_t i = 0; i < m; ++i) {
            sr[i] += partials[b].r[i];
            sr2[i] += partials[b].r2[i];
            sl[i] += partials[b].l[i];
            sl2[i] += partials[b].l2[i];
        }

    const double nn = static_cast<double>(runs);
    const double floor_se = 1.0 / nn;
    std::vector<SimEstimate> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i].reach_mean = sr[i] / nn;
        out[i].lost_mean = sl[i] / nn;
        auto se = [&](double s, double s2) {
            if (runs < 2) return floor_se;
            double var = std::max(0.0, (s2 - s * s / nn) / (nn - 1.0));
            return std::max(std::sqrt(var / nn), floor_se);
        };
        out[i].reach_se = se(sr[i], sr2[i]);
        out[i].lost_se = se(sl[i], sl2[i]);
    }
    return out;
}

}  // namespace evolve::ctmc
