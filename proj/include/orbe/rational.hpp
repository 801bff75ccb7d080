// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include "orbe/model.hpp"

#include <vector>

namespace orbe {

/**
 * The value at one "missing" state as a function of that state's transition
 * rows, everything else held fixed:
 *
 *     Z(P) = (base_reward + sum_a alpha_a · P(a)) / (1 - sum_a beta_a · P(a))
 *
 * built from first-return quantities: for s' != missing_state, u(s') is the
 * expected discounted reward collected before first reaching the missing
 * state and h(s') the expected discount factor on first arrival, under the
 * fixed rows; u(missing)=0, h(missing)=1.  Then alpha_a = gamma pi(a) u and
 * beta_a = gamma pi(a) h.  The denominator stays strictly positive on the
 * per-action simplices whenever the discount is below one.
 */
struct RationalValueForm {
    Real base_reward = 0.0; ///< policy-weighted reward at the missing state
    Mat alpha;              ///< [action][successor]
    Mat beta;               ///< [action][successor]
    int missing_state = 0;
};

/// A feasible direction at a point of an uncertainty set: per-action rows
/// that sum to zero (movement stays on the simplex affine hull).
using Direction = Mat;

/**
 * Computes the rational form at `missing_state` for the given policy, with
 * all other states' transitions taken from `kernel` (its rows at the missing
 * state are ignored).  Linear solves are residual-checked to 1e-9.
 */
RationalValueForm rational_coefficients(const Rmdp& m, const Policy& pi,
                                        const TransitionKernel& kernel, int missing_state);

/// The first-return quantities behind a rational form: u(s') is expected
/// discounted reward before first reaching the missing state, h(s') the
/// expected discount factor at first arrival.  They depend on the policy and
/// kernel only outside the missing state.
struct FirstReturn {
    Vec u;
    Vec h;
};

/// First-return quantities for one missing state.
FirstReturn first_return(const Rmdp& m, const Policy& pi, const TransitionKernel& kernel,
                         int missing_state);

/// First-return quantities for every missing state from one factorization.
std::vector<FirstReturn> first_return_all(const Rmdp& m, const Policy& pi,
                                          const TransitionKernel& kernel);

/// The rational form obtained by substituting the pure choice of `action` at
/// the missing state, keeping the reference policy elsewhere (which is
/// already baked into `fr`).
RationalValueForm form_for_action(const Rmdp& m, int missing_state, int action,
                                  const FirstReturn& fr);

/**
 * The forms for every state at once from a single factorization of the full
 * occupancy system, via the block-inverse reduction; equals the per-state
 * construction but costs one O(|S|^3) factorization total instead of one per
 * state.
 */
std::vector<RationalValueForm> rational_coefficients_all(const Rmdp& m, const Policy& pi,
                                                         const TransitionKernel& kernel);

/// Evaluates Z at one candidate set of rows for the missing state.
Real rational_value(const RationalValueForm& f, const StateTransition& p);

/// Exact directional derivative of Z at `at` along v (rows of v sum to 0):
/// with N, D the numerator/denominator at `at`, (dN·D + N·dD̄)/D² where
/// dN = sum alpha·v and dD̄ = sum beta·v.
Real directional_derivative(const RationalValueForm& f, const StateTransition& at,
                            const Direction& v);

/**
 * True iff both forms agree in value and in directional derivative (along
 * p2 - p1) at both endpoints, within tol.  For degree-one rational forms
 * that agreement forces agreement on the whole segment.
 */
bool segment_equivalence_check(const RationalValueForm& a, const RationalValueForm& b,
                               const StateTransition& p1, const StateTransition& p2, Real tol);

} // namespace orbe
