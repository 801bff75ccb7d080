#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "orbe/model.hpp"
#include "orbe/rational.hpp"

namespace orbe {

/**
 * Brute-force verifiers used by tests: uncertainty-set sampling, empirical
 * policy-dominance checks, deterministic-policy enumeration, plain value
 * iteration on a fixed kernel, and a finite-difference derivative probe.
 * Everything here is an independent cross-check of the solver modules, kept
 * deliberately simple.
 */

/**
 * Draws n feasible transition-row sets for one state, deterministically per
 * seed.  When the set's vertices can be enumerated and there are at most n/2
 * of them, all vertices are returned first and the remainder is filled with
 * seeded convex combinations of them; otherwise the combinations are taken
 * over LP-probed extreme points plus the set's relative-interior point.
 */
std::vector<StateTransition> sample_uncertainty(const Rmdp& m, int state, int n,
                                                std::uint64_t seed);

/**
 * Draws n full kernels from the product of all states' uncertainty sets by
 * combining independent per-state samples index-wise.
 */
std::vector<TransitionKernel> sample_kernels(const Rmdp& m, int n, std::uint64_t seed);

/**
 * Every kernel whose rows are vertices of the respective per-state sets (the
 * vertices of the product set).  Empty optional when some state's vertices
 * cannot be enumerated or the product exceeds `cap`.
 */
std::optional<std::vector<TransitionKernel>> product_vertex_kernels(const Rmdp& m,
                                                                    std::size_t cap = 100000);

/**
 * How policy A relates to policy B over the sampled kernels, in the model's
 * optimization sense ("better" is higher return for maximize, lower for
 * minimize).  Ties use the band |difference| <= slack * (1 + max |return|)
 * per sample.  Dominates/Dominated express weak dominance without a strict
 * witness; with the symmetric tie band they cannot arise from sampling and
 * are present for completeness of the scale.
 */
enum class DominanceRelation {
    Equal,
    Dominates,
    StrictlyDominates,
    Dominated,
    StrictlyDominated,
    Incomparable,
};

const char* dominance_relation_name(DominanceRelation r);

struct DominanceVerdict {
    DominanceRelation relation = DominanceRelation::Equal;
    /// A sampled kernel where A beats B strictly (StrictlyDominates,
    /// Incomparable).
    std::optional<TransitionKernel> witness_better;
    /// A sampled kernel where B beats A strictly (StrictlyDominated,
    /// Incomparable).
    std::optional<TransitionKernel> witness_worse;
    /// Returns of A and B at the witnesses, for diagnostics.
    Real best_gap = 0.0;  ///< most positive oriented advantage of A
    Real worst_gap = 0.0; ///< most negative oriented advantage of A
};

/// Evaluates both policies exactly at every sampled kernel and classifies.
/// Verdicts are sampling-based: "dominates" means "not refuted on samples".
DominanceVerdict dominance_check(const Rmdp& m, const Policy& piA, const Policy& piB,
                                 const std::vector<TransitionKernel>& samples,
                                 Real slack = 1e-7);

/**
 * All deterministic policies over enabled actions.  The number of such
 * policies is the product over states of the enabled-action counts; throws
 * ValidationError("policy space N exceeds cap") when it exceeds `cap`.
 */
std::vector<Policy> enumerate_deterministic_policies(const Rmdp& m, std::uint64_t cap);

/// Plain value iteration on one fixed kernel (no uncertainty), sense-aware.
struct ClassicalViResult {
    Vec value;
    Policy policy;
    int iterations = 0;
    bool converged = false;
};
ClassicalViResult classical_value_iteration(const Rmdp& m, const TransitionKernel& kernel,
                                            Real epsilon = 1e-12, int max_iterations = 1000000);

/**
 * Central finite-difference estimate of the derivative of the missing
 * state's value along direction v (per-action rows summing to zero): the
 * kernel's rows at `missing_state` are displaced by +-step * v and the value
 * is recomputed exactly each time.
 */
Real fd_directional_derivative(const Rmdp& m, const Policy& pi, const TransitionKernel& kernel,
                               int missing_state, const Direction& v, Real step = 1e-6);

}  // namespace orbe
