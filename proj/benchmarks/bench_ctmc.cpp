// Times the serial reference kernels against the OpenMP variants on the
// proposed 1110-state model and checks that both produce identical bytes.
// Not a test: numbers land on stdout for eyeballing.
#include <chrono>
#include <cstdio>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "evolve/analysis.hpp"
#include "evolve/ctmc.hpp"

using namespace evolve::ctmc;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e30;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace

int main() {
    Exp2Params params;
    GuardedModel gm = proposed_model(params);
    ExplicitCtmc mc = build_explicit(gm);

    std::vector<double> Ts;
    for (double t = 0; t <= 200.0 + 1e-9; t += 5) Ts.push_back(t);
    std::vector<char> absorbed(mc.states().size(), 0);
    for (int s : mc.states_where(gm, "emb_st", params.st_max)) absorbed[s] = 1;
    auto pred = [&](int s) { return absorbed[s] != 0; };
    std::size_t jump_entries = 0;
    for (const auto& row : mc.jumps()) jump_entries += row.size();

#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("compiled without OpenMP; both columns run the serial kernel\n");
#endif
    std::printf("model: %zu states, %zu jump entries, grid of %zu horizons\n\n",
                mc.states().size(), jump_entries, Ts.size());

    GridResult g_serial, g_omp;
    double t_grid_serial = time_best_of(3, [&] {
        g_serial = transient_grid(mc, Ts, pred, 1e-9, Kernel::Serial);
    });
    double t_grid_omp = time_best_of(3, [&] {
        g_omp = transient_grid(mc, Ts, pred, 1e-9, Kernel::OpenMP);
    });
    bool grid_equal = g_serial.reach == g_omp.reach && g_serial.lost == g_omp.lost &&
                      g_serial.dist_sum == g_omp.dist_sum;
    std::printf("uniformization grid   serial %8.3fs   openmp %8.3fs   speedup %5.2fx   bitwise %s\n",
                t_grid_serial, t_grid_omp, t_grid_serial / t_grid_omp,
                grid_equal ? "equal" : "DIFFERENT");

    const std::uint64_t runs = 20000;
    std::vector<SimEstimate> s_serial, s_omp;
    double t_sim_serial = time_best_of(3, [&] {
        s_serial = simulate(mc, Ts, pred, runs, 3, 1, Kernel::Serial);
    });
    double t_sim_omp = time_best_of(3, [&] {
        s_omp = simulate(mc, Ts, pred, runs, 3, 1, Kernel::OpenMP);
    });
    bool sim_equal = s_serial.size() == s_omp.size();
    for (std::size_t i = 0; sim_equal && i < s_serial.size(); ++i)
        sim_equal = s_serial[i].reach_mean == s_omp[i].reach_mean &&
                    s_serial[i].reach_se == s_omp[i].reach_se &&
                    s_serial[i].lost_mean == s_omp[i].lost_mean &&
                    s_serial[i].lost_se == s_omp[i].lost_se;
    std::printf("simulation %6llu runs serial %8.3fs   openmp %8.3fs   speedup %5.2fx   bitwise %s\n",
                static_cast<unsigned long long>(runs), t_sim_serial, t_sim_omp,
                t_sim_serial / t_sim_omp, sim_equal ? "equal" : "DIFFERENT");

    return (grid_equal && sim_equal) ? 0 : 1;
}
