// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

namespace orbe {

using Real = double;
using Vec = std::vector<Real>;
using Mat = std::vector<Vec>;

/// Outcome of a linear program solve.
enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec x;                ///< primal solution (valid only when Optimal)
    Real objective = 0.0; ///< c'x at the solution
};

/**
 * Solves   minimize    c'x
 *          subject to  A x <= b,  Aeq x = beq,  x >= 0
 *
 * with a dense two-phase primal simplex.  Pivoting uses Dantzig's rule with
 * a Bland fallback after a stall, so the method terminates and is fully
 * deterministic: identical inputs always yield the identical vertex, which
 * downstream fixed-point iterations rely on.
 *
 * Intended for the small per-state subproblems that arise here (tens of
 * variables); no sparsity or factorization updates are attempted.
 */
LpResult solve_lp(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
                  const Vec& c, Real tol = 1e-9);

/// Convenience wrapper for maximize c'x over the same constraint system.
LpResult solve_lp_max(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
                      const Vec& c, Real tol = 1e-9);

} // namespace orbe
