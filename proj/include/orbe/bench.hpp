#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orbe/gridworld.hpp"
#include "orbe/model.hpp"
#include "orbe/solver.hpp"

namespace orbe {

/**
 * The experiment matrix: for every (size, nu, seed) cell, generate a
 * gridworld and time three solution paths —
 *
 *  (a) plain robust value iteration;
 *  (b) robust value iteration plus a best-case re-solve restricted to the
 *      robust-optimal actions (warm-started, opposite adversary);
 *  (c) robust value iteration plus derivative pruning of the robust-optimal
 *      actions at the worst-case anchor, along the direction toward each
 *      set's relative-interior point (one batched first-return
 *      factorization, no extra value iteration).
 *
 * Reported times are totals: path (a)'s time plus the extra work of the
 * respective refinement.  Each path also reports the percentage of decision
 * states whose chosen action is best-effort-tagged.
 */
struct BenchConfig {
    std::vector<int> sizes{100, 400};
    std::vector<double> nus{0.0, 0.5, 1.0};
    int seeds = 10;  ///< runs seeds seed_base .. seed_base+seeds-1 per cell
    std::uint64_t seed_base = 0;
    GridVariant variant = GridVariant::Srect;
    double gamma = 0.99;
    double p = 0.25;
    double q_max = 0.1;
    double obstacle_fraction = 0.1;  ///< obstacles = round(fraction * size)
    SolverConfig solver;             ///< epsilon / iteration budget per solve
    Real candidate_tolerance = -1.0; ///< < 0 means 10 * solver.epsilon
    int jobs = 1;                    ///< concurrent cells; rows stay ordered
};

struct BenchResultRow {
    int size = 0;
    double nu = 0.0;
    long long seed = 0;  ///< -1 marks a per-(size, nu) mean row
    double time_rvi_s = 0.0;
    double be_rvi_pct = 0.0;
    double time_bestcase_s = 0.0;
    double be_bestcase_pct = 0.0;
    double time_deriv_s = 0.0;
    double be_deriv_pct = 0.0;
    std::string error;  ///< empty on success
};

/**
 * Runs the matrix.  Rows come grouped per (size, nu) in configuration order:
 * one row per seed followed by one seed=-1 mean row over that group's
 * successful runs.  Per-cell failures are recorded in the error column (the
 * numeric fields stay zero) and the run continues.  Model generation and
 * I/O are excluded from the timings.
 */
std::vector<BenchResultRow> run_bench(const BenchConfig& cfg);

/// Grid width used for a given state count: the smallest divisor of `size`
/// at or above sqrt(size); height is size divided by it.
int bench_grid_width(int size);

/**
 * CSV with header
 * `size,nu,seed,time_rvi_s,be_rvi_pct,time_bestcase_s,be_bestcase_pct,time_deriv_s,be_deriv_pct,error`.
 * Numbers are shortest round-trip decimal; error text has commas and
 * newlines replaced so every row stays one line.
 */
std::string bench_to_csv(const std::vector<BenchResultRow>& rows);

/// Parses bench_to_csv output (the error column may be absent).  Throws
/// ValidationError on malformed input.  Round-trips rows exactly.
std::vector<BenchResultRow> bench_from_csv(const std::string& text);

}  // namespace orbe
