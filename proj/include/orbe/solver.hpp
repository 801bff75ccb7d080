// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include "orbe/model.hpp"

#include <utility>
#include <vector>

namespace orbe {

/// Which way the uncertainty optimizes the stagewise objective.
enum class Adversary { Min, Max };

/// Per-state sets of allowed actions; the represented policy space is their
/// Cartesian product.
using CandidateSet = std::vector<std::vector<int>>;

struct SolverConfig {
    Real epsilon = 1e-4;            ///< convergence threshold (reward units)
    int max_iterations = 1000;
    Real inner_lp_tolerance = 1e-9;
    Real action_tie_tolerance = 1e-9; ///< relative tie window for greedy argmax
};

struct RobustSolution {
    Vec value;
    Policy policy;                   ///< deterministic, one-hot rows
    TransitionKernel worst_transition;
    int iterations = 0;
    bool converged = false;
    Adversary adversary = Adversary::Min;
    Vec sweep_deltas;                ///< max value change per sweep
    bool oscillation_warning = false; ///< non-convergence looked 2-periodic
};

/// The adversary direction that makes a solve "robust" for this model's
/// objective sense: Min for maximize models, Max for minimize models.
Adversary default_adversary(const Rmdp& m);

/**
 * Optimizes the one-state objective R^pi(s) + gamma * sum_a pi(s,a) P(a)·v
 * over the state's uncertainty set.  Intervals use the exact sort-and-
 * saturate procedure per action row — every enabled row is optimized in the
 * given direction, including rows the policy does not weight, so the result
 * is the canonical per-(state,action) extremal kernel.  Polytopes solve one
 * LP over the support columns, which ties unweighted rows through the
 * coupling constraints.  Returns the optimizing rows and the objective.
 */
std::pair<StateTransition, Real> inner_optimize_state(const Rmdp& m, int s, const Vec& pi_s,
                                                      const Vec& v, Adversary direction,
                                                      Real lp_tol = 1e-9);

/// Exact optimizer of w·x over {l <= x <= u, sum x = 1}: mass is pushed to
/// the smallest (Min) or largest (Max) weights first.  Ties keep index order.
Vec sort_and_saturate(const Vec& lower, const Vec& upper, const Vec& weights,
                      Adversary direction);

/**
 * Robust value iteration: each Jacobi sweep applies the robust Bellman
 * operator, re-optimizing every allowed action's uncertainty in the
 * adversary direction against the previous sweep's values before the greedy
 * deterministic choice (ties resolved to the first declared action).  Each
 * sweep is a gamma-contraction, so the iteration converges from any start;
 * it stops once values move at most epsilon.
 *
 * `restriction` (optional) limits each state's greedy choice to the given
 * actions.  `warm_value`/`warm_kernel` (optional) start the iteration from a
 * previous solution instead of zeros and the nominal kernel.
 */
RobustSolution robust_value_iteration(const Rmdp& m, const SolverConfig& cfg,
                                      Adversary adversary,
                                      const CandidateSet* restriction = nullptr,
                                      const Vec* warm_value = nullptr,
                                      const TransitionKernel* warm_kernel = nullptr);

/// Convenience overload using the model's natural robust adversary.
RobustSolution robust_value_iteration(const Rmdp& m, const SolverConfig& cfg = {});

/**
 * For each state, every enabled action whose Q-value — with the uncertainty
 * optimized in the solution's adversary direction against the solution's
 * value function — lies within tol of the state's best; the Cartesian
 * product over states is the surviving policy set.  When `restriction` is
 * given, only those actions compete.
 */
CandidateSet optimal_action_set(const Rmdp& m, const RobustSolution& sol, Real tol,
                                const CandidateSet* restriction = nullptr);

} // namespace orbe
