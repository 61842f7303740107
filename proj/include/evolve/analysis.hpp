// Transient analysis by uniformization (distribution at T, cumulative
// reward via Erlang-tail weights) and exact-jump stochastic simulation.
// The hot kernels exist twice: a serial reference and an OpenMP variant
// that is bitwise-identical to it for any thread count (fixed blocked
// reductions, transposed mat-vec with one owner per output element).
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "evolve/ctmc.hpp"

namespace evolve::ctmc {

enum class Kernel { Serial, OpenMP };

// The OpenMP variant when compiled in, otherwise the serial reference.
Kernel default_kernel();

struct TransientResult {
    double T = 0;
    std::vector<double> dist;  // by explicit-state index
    double trunc_error = 0;    // <= requested epsilon
};

// Distribution at time T. Lambda = 1.02 * max exit rate; Poisson terms by
// stable log-space evaluation; truncation once cumulative mass reaches
// 1 - eps.
TransientResult transient(const ExplicitCtmc& mc, double T, double eps = 1e-9,
                          Kernel kernel = default_kernel());

using StatePred = std::function<bool(int state_index)>;

double reach_probability(const ExplicitCtmc& mc, const StatePred& pred, double T,
                         double eps = 1e-9, Kernel kernel = default_kernel());

// E[accumulated reward over [0, T]] = sum_k (1/Lambda)(1 - C_k) rho·pi_k,
// C_k the cumulative Poisson(Lambda T) mass through k (the exact
// uniformization integral, truncated to eps of reward mass).
double expected_lost(const ExplicitCtmc& mc, double T, double eps = 1e-9,
                     Kernel kernel = default_kernel());

// One power-iteration pass serving a whole time grid: the pi_k do not
// depend on T, only the weights do.
struct GridResult {
    std::vector<double> T;
    std::vector<double> reach;
    std::vector<double> lost;
    std::vector<double> dist_sum;  // normalization check per T
    double trunc_error = 0;
};

GridResult transient_grid(const ExplicitCtmc& mc, std::span<const double> Ts,
                          const StatePred& pred, double eps = 1e-9,
                          Kernel kernel = default_kernel());

struct SimEstimate {
    double reach_mean = 0, reach_se = 0;
    double lost_mean = 0, lost_se = 0;
};

// Exact-jump simulation: exponential holding times over the full jump
// table (rewarded self-loops fire too), categorical jump choice, one pass
// recording every grid time. Reproducible: run r draws from an
// mt19937_64 seeded by mix(seed, cell, r), so results are independent of
// thread count and schedule; the reduction is serial-order over runs.
// Standard errors carry a 1/runs floor so zero-hit cells stay comparable.
std::vector<SimEstimate> simulate(const ExplicitCtmc& mc, std::span<const double> Ts,
                                  const StatePred& pred, std::uint64_t runs,
                                  std::uint64_t seed, std::uint64_t cell = 0,
                                  Kernel kernel = default_kernel());

}  // namespace evolve::ctmc
