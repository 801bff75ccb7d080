// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include "orbe/rational.hpp"
#include "orbe/solver.hpp"

#include <string>
#include <vector>

namespace orbe {

/// The four refinement stages, in execution order.  Each stage prunes the
/// per-state candidate action sets; the pipeline stops at the first stage
/// whose Cartesian product is a singleton.
enum class OrbeStage { MaxminUnique, MaxmaxUnique, DerivMax, DerivMin };

const char* orbe_stage_name(OrbeStage s);

/// How the worst-case/best-case anchor segment sits inside a state's
/// uncertainty set.
enum class InteriorClass { Interior, Covering, Violated };

/// Worst-case and best-case transition anchors for one reference policy.
struct WorstBestPair {
    TransitionKernel worst;
    TransitionKernel best;
    Real worst_value = 0.0;
    Real best_value = 0.0;
};

struct OrbeConfig {
    SolverConfig solver;
    /// Tie window for the candidate-set stages; < 0 means 10x solver.epsilon.
    Real candidate_tolerance = -1.0;
    /// Relative tie window when pruning by directional derivative.
    Real derivative_tolerance = 1e-7;
    /// Target step (probability units) when a best anchor must be moved off
    /// a shared facet toward the set's relative interior.
    Real perturbation_step = 0.01;
};

struct OrbeReport {
    OrbeStage stage_reached = OrbeStage::MaxminUnique;
    /// Stage name -> per-state surviving action counts, for every stage run.
    std::vector<std::pair<std::string, std::vector<std::size_t>>> candidate_counts;
    Policy policy;
    Real robust_value = 0.0;
    /// Per-state segment classification ("interior", "covering", "perturbed");
    /// empty unless the derivative stages ran.
    std::vector<std::string> interior_condition;
    /// Stage name -> wall-clock seconds.
    std::vector<std::pair<std::string, Real>> stage_seconds;
    /// True when worst and best anchors coincided everywhere, making every
    /// direction zero; the derivative stages then prune nothing.
    bool derivative_stages_skipped = false;
    /// True when even the last stage left some state with several actions
    /// (any surviving member is returned).
    bool final_set_nonsingleton = false;
    /// The stage-1 robust solve, for callers that need values or kernels.
    RobustSolution robust;
};

std::string orbe_report_to_json_text(const OrbeReport& report, int indent = 2);

/**
 * The full four-stage refinement.  Stage 1 solves the robust problem and
 * keeps per-state actions attaining the robust optimum; stage 2 re-solves
 * with the uncertainty optimizing in the policy's favor, restricted to the
 * stage-1 survivors; stages 3 and 4 prune by the directional derivative of
 * the one-state rational value form along worst-to-best anchor directions,
 * at the worst anchor (keeping the largest) then at the best anchor
 * (keeping the smallest), with all comparisons flipped for minimize-sense
 * models.  Throws ConvergenceError when an underlying solve does not
 * converge.
 */
OrbeReport compute_orbe(const Rmdp& m, const OrbeConfig& cfg = {});

/// Anchor kernels and values for a fixed deterministic policy: the
/// uncertainty's optimum against it in both directions, warm-started from
/// the provided solution when given.
WorstBestPair worst_best_pair(const Rmdp& m, const std::vector<int>& actions,
                              const SolverConfig& cfg, const RobustSolution* warm_robust);

/**
 * One derivative pruning pass over the candidate sets: per state, scores
 * each candidate action's rational form along that state's anchor direction
 * (best minus worst rows, with best anchors already perturbed where needed)
 * and keeps the extremal ones within the relative tie window.  `at_worst`
 * selects the anchor to differentiate at and the optimization direction:
 * at the worst anchor the best derivative survives, at the best anchor the
 * smallest (swapped for minimize-sense models).
 */
CandidateSet derivative_stage(const Rmdp& m, const CandidateSet& candidates,
                              const std::vector<int>& reference, const WorstBestPair& pair,
                              bool at_worst, const OrbeConfig& cfg);

/**
 * Classifies the segment between two feasible points of a state's
 * uncertainty set: Interior when some convex combination lies strictly
 * inside every non-degenerate constraint, Covering when the whole feasible
 * set lies on the segment's line (so no strict interior crossing is needed),
 * Violated otherwise.
 */
InteriorClass interior_condition(const Rmdp& m, int state, const StateTransition& p_worst,
                                 const StateTransition& p_best);

/**
 * Moves the best anchor strictly inside the set (toward its relative
 * interior point) so the worst-to-best segment crosses the relative
 * interior; the step is capped by `step` and by half the interior point's
 * smallest slack.  Returns the input unchanged when it already qualifies.
 */
StateTransition perturb_best_point(const Rmdp& m, int state, const StateTransition& p_worst,
                                   const StateTransition& p_best, Real step = 0.01);

} // namespace orbe
