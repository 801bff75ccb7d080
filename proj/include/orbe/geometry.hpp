// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include "orbe/lp.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace orbe {

/**
 * Convex polytope in halfspace representation over nonnegative coordinates:
 *
 *     { x >= 0 :  A x <= b,  Aeq x = beq }
 *
 * This is the working geometry for per-state uncertainty sets; the per-action
 * probability-simplex constraints enter through Aeq rows.
 */
struct HPolytope {
    std::size_t dim = 0;
    Mat A;
    Vec b;
    Mat Aeq;
    Vec beq;
};

/**
 * A point in the relative interior of an HPolytope together with the
 * classification of which inequality rows (and which nonnegativity bounds)
 * hold with equality on the entire feasible set.  Those "implicit equality"
 * constraints define the affine hull; the remaining ones must be strictly
 * slack at a relative-interior point.
 */
struct InteriorPointInfo {
    bool feasible = false;
    Vec point;                       ///< relative-interior point when feasible
    std::vector<char> row_implicit;  ///< per A row: equality over the whole set
    std::vector<char> coord_pinned;  ///< per coordinate: x_i == 0 over the whole set
    Real slack = 0.0;                ///< min slack of non-implicit rows at point
};

/**
 * Finds a relative-interior point by maximizing the minimum slack, promoting
 * constraints that can never be slack to implicit equalities until the
 * remaining ones admit strictly positive slack.  Terminates because each
 * round either succeeds or promotes at least one constraint.
 */
InteriorPointInfo find_relative_interior(const HPolytope& poly, Real tol = 1e-9);

/**
 * Checks whether x lies in the relative interior of the polytope described by
 * `info`: equalities within eq_tol, every non-implicit inequality strictly
 * slack by more than strict_tol.
 */
bool in_relative_interior(const HPolytope& poly, const InteriorPointInfo& info,
                          const Vec& x, Real strict_tol = 1e-9, Real eq_tol = 1e-7);

struct VertexEnumLimits {
    std::size_t max_free_dims = 12;
    std::size_t max_combinations = 300000;
    std::size_t max_vertices = 4096;
};

/**
 * Enumerates all vertices by brute force over active-constraint subsets.
 * Returns std::nullopt when the instance exceeds the limits (too many free
 * dimensions or candidate bases), so callers can fall back to LP-based
 * methods.  The returned vertices are deduplicated and sorted, hence the
 * order is deterministic.
 */
std::optional<std::vector<Vec>> enumerate_vertices(const HPolytope& poly,
                                                   const VertexEnumLimits& limits = {});

/// Maximizes c'x over the polytope.  Infeasible/unbounded map to the LP status.
LpResult maximize_over(const HPolytope& poly, const Vec& c, Real tol = 1e-9);

/// Minimizes c'x over the polytope.
LpResult minimize_over(const HPolytope& poly, const Vec& c, Real tol = 1e-9);

/// Largest violation of the polytope's constraints at x (0 when feasible).
Real constraint_violation(const HPolytope& poly, const Vec& x);

} // namespace orbe
