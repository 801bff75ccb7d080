// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace orbe {

namespace {

Real row_norm(const Vec& a) {
    Real s = 0.0;
    for (Real v : a) s += v * v;
    return std::sqrt(s);
}

Real dot(const Vec& a, const Vec& x) {
    Real s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
    return s;
}

/// Builds the constraint system of `poly` with the currently promoted
/// implicit equalities folded into the equality block.  When `slack_var` is
/// true an extra variable t is appended with coefficient ||a_i|| on every
/// remaining inequality plus the cap t <= 1, so maximizing t finds the point
/// of largest minimum normalized slack.
struct WorkingSystem {
    Mat A;
    Vec b;
    Mat Aeq;
    Vec beq;
    std::size_t vars = 0;
};

WorkingSystem build_system(const HPolytope& poly, const std::vector<char>& row_implicit,
                           const std::vector<char>& coord_pinned, bool slack_var, Real tol) {
    const std::size_t n = poly.dim;
    WorkingSystem sys;
    sys.vars = n + (slack_var ? 1 : 0);
    for (std::size_t i = 0; i < poly.A.size(); ++i) {
        Vec row(sys.vars, 0.0);
        std::copy(poly.A[i].begin(), poly.A[i].end(), row.begin());
        if (row_implicit[i]) {
            sys.Aeq.push_back(std::move(row));
            sys.beq.push_back(poly.b[i]);
            continue;
        }
        const Real norm = row_norm(poly.A[i]);
        if (norm <= tol) continue; // trivially slack zero row (b_i > tol)
        if (slack_var) row[n] = norm;
        sys.A.push_back(std::move(row));
        sys.b.push_back(poly.b[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (coord_pinned[j]) {
            Vec row(sys.vars, 0.0);
            row[j] = 1.0;
            sys.Aeq.push_back(std::move(row));
            sys.beq.push_back(0.0);
        } else if (slack_var) {
            // x_j >= t  for coordinates allowed to be positive
            Vec row(sys.vars, 0.0);
            row[j] = -1.0;
            row[n] = 1.0;
            sys.A.push_back(std::move(row));
            sys.b.push_back(0.0);
        }
    }
    for (std::size_t i = 0; i < poly.Aeq.size(); ++i) {
        Vec row(sys.vars, 0.0);
        std::copy(poly.Aeq[i].begin(), poly.Aeq[i].end(), row.begin());
        sys.Aeq.push_back(std::move(row));
        sys.beq.push_back(poly.beq[i]);
    }
    if (slack_var) {
        Vec cap(sys.vars, 0.0);
        cap[n] = 1.0;
        sys.A.push_back(std::move(cap));
        sys.b.push_back(1.0);
    }
    return sys;
}

} // namespace

InteriorPointInfo find_relative_interior(const HPolytope& poly, Real tol) {
    const std::size_t n = poly.dim;
    const std::size_t m = poly.A.size();
    InteriorPointInfo info;
    info.row_implicit.assign(m, 0);
    info.coord_pinned.assign(n, 0);

    // Zero rows carry no direction: 0'x <= b is either everywhere-equality
    // (b ~ 0), trivially slack (b > 0), or infeasible (b < 0).
    for (std::size_t i = 0; i < m; ++i) {
        if (row_norm(poly.A[i]) <= tol) {
            if (poly.b[i] < -tol) return info; // infeasible
            if (std::abs(poly.b[i]) <= tol) info.row_implicit[i] = 1;
        }
    }

    const std::size_t max_rounds = m + n + 2;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        WorkingSystem sys = build_system(poly, info.row_implicit, info.coord_pinned, true, tol);
        Vec c(sys.vars, 0.0);
        c[n] = 1.0;
        LpResult res = solve_lp_max(sys.A, sys.b, sys.Aeq, sys.beq, c);
        if (res.status != LpStatus::Optimal) return info; // empty set
        const Real t_star = res.x[n];
        if (t_star > tol) {
            info.feasible = true;
            info.point.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
            info.slack = t_star;
            return info;
        }

        // No simultaneous slack is possible, so by convexity at least one
        // remaining constraint is an implicit equality; find and promote it.
        WorkingSystem flat = build_system(poly, info.row_implicit, info.coord_pinned, false, tol);
        bool promoted = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (info.row_implicit[i] || row_norm(poly.A[i]) <= tol) continue;
            Vec obj(flat.vars, 0.0);
            for (std::size_t j = 0; j < n; ++j) obj[j] = -poly.A[i][j]; // max slack = b - a'x
            LpResult slack_lp = solve_lp_max(flat.A, flat.b, flat.Aeq, flat.beq, obj);
            if (slack_lp.status != LpStatus::Optimal) return info;
            if (slack_lp.objective + poly.b[i] <= tol) {
                info.row_implicit[i] = 1;
                promoted = true;
            }
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (info.coord_pinned[j]) continue;
            Vec obj(flat.vars, 0.0);
            obj[j] = 1.0;
            LpResult up = solve_lp_max(flat.A, flat.b, flat.Aeq, flat.beq, obj);
            if (up.status != LpStatus::Optimal) return info;
            if (up.objective <= tol) {
                info.coord_pinned[j] = 1;
                promoted = true;
            }
        }
        if (!promoted) {
            // Numerically everything is already as slack as it gets; accept
            // the best point found rather than looping.
            info.feasible = true;
            info.point.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
            info.slack = std::max<Real>(t_star, 0.0);
            return info;
        }
    }
    return info; // unreachable in exact arithmetic
}

bool in_relative_interior(const HPolytope& poly, const InteriorPointInfo& info,
                          const Vec& x, Real strict_tol, Real eq_tol) {
    if (!info.feasible || x.size() != poly.dim) return false;
    for (std::size_t i = 0; i < poly.A.size(); ++i) {
        const Real lhs = dot(poly.A[i], x);
        if (info.row_implicit[i]) {
            if (std::abs(lhs - poly.b[i]) > eq_tol) return false;
        } else if (poly.b[i] - lhs <= strict_tol) {
            return false;
        }
    }
    for (std::size_t j = 0; j < poly.dim; ++j) {
        if (info.coord_pinned[j]) {
            if (std::abs(x[j]) > eq_tol) return false;
        } else if (x[j] <= strict_tol) {
            return false;
        }
    }
    for (std::size_t i = 0; i < poly.Aeq.size(); ++i) {
        if (std::abs(dot(poly.Aeq[i], x) - poly.beq[i]) > eq_tol) return false;
    }
    return true;
}

Real constraint_violation(const HPolytope& poly, const Vec& x) {
    Real worst = 0.0;
    for (std::size_t i = 0; i < poly.A.size(); ++i)
        worst = std::max(worst, dot(poly.A[i], x) - poly.b[i]);
    for (std::size_t i = 0; i < poly.Aeq.size(); ++i)
        worst = std::max(worst, std::abs(dot(poly.Aeq[i], x) - poly.beq[i]));
    for (Real v : x) worst = std::max(worst, -v);
    return worst;
}

LpResult maximize_over(const HPolytope& poly, const Vec& c, Real tol) {
    return solve_lp_max(poly.A, poly.b, poly.Aeq, poly.beq, c, tol);
}

LpResult minimize_over(const HPolytope& poly, const Vec& c, Real tol) {
    return solve_lp(poly.A, poly.b, poly.Aeq, poly.beq, c, tol);
}

std::optional<std::vector<Vec>> enumerate_vertices(const HPolytope& poly,
                                                   const VertexEnumLimits& limits) {
    const std::size_t n = poly.dim;
    InteriorPointInfo info = find_relative_interior(poly);
    if (!info.feasible) return std::vector<Vec>{};

    // Equality block: declared equalities plus implicit ones; its rank fixes
    // the affine hull, and vertices activate `free` further inequalities.
    Mat eq_rows;
    Vec eq_rhs;
    for (std::size_t i = 0; i < poly.Aeq.size(); ++i) {
        eq_rows.push_back(poly.Aeq[i]);
        eq_rhs.push_back(poly.beq[i]);
    }
    for (std::size_t i = 0; i < poly.A.size(); ++i) {
        if (info.row_implicit[i]) {
            eq_rows.push_back(poly.A[i]);
            eq_rhs.push_back(poly.b[i]);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (info.coord_pinned[j]) {
            Vec row(n, 0.0);
            row[j] = 1.0;
            eq_rows.push_back(std::move(row));
            eq_rhs.push_back(0.0);
        }
    }

    Eigen::MatrixXd E(static_cast<Eigen::Index>(eq_rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < eq_rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eq_rows[i][j];
    std::size_t rank = 0;
    if (eq_rows.empty()) {
        rank = 0;
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(E);
        qr.setThreshold(1e-9);
        rank = static_cast<std::size_t>(qr.rank());
    }
    if (rank > n) rank = n;
    const std::size_t free_dims = n - rank;
    if (free_dims > limits.max_free_dims) return std::nullopt;

    // Candidate facet rows: the non-implicit inequalities and the
    // nonnegativity bounds of coordinates that are not pinned to zero.
    Mat cand_rows;
    Vec cand_rhs;
    for (std::size_t i = 0; i < poly.A.size(); ++i) {
        if (!info.row_implicit[i]) {
            cand_rows.push_back(poly.A[i]);
            cand_rhs.push_back(poly.b[i]);
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!info.coord_pinned[j]) {
            Vec row(n, 0.0);
            row[j] = -1.0;
            cand_rows.push_back(std::move(row));
            cand_rhs.push_back(0.0);
        }
    }

    const std::size_t pool = cand_rows.size();
    std::vector<Vec> vertices;

    auto solve_candidate = [&](const std::vector<std::size_t>& chosen) {
        const std::size_t rows = eq_rows.size() + chosen.size();
        Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < eq_rows.size(); ++i, ++r) {
            for (std::size_t j = 0; j < n; ++j) M(r, static_cast<Eigen::Index>(j)) = eq_rows[i][j];
            rhs(r) = eq_rhs[i];
        }
        for (std::size_t k : chosen) {
            for (std::size_t j = 0; j < n; ++j) M(r, static_cast<Eigen::Index>(j)) = cand_rows[k][j];
            rhs(r) = cand_rhs[k];
            ++r;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
        qr.setThreshold(1e-9);
        if (static_cast<std::size_t>(qr.rank()) != n) return;
        Eigen::VectorXd x = qr.solve(rhs);
        if (((M * x) - rhs).cwiseAbs().maxCoeff() > 1e-8) return;
        Vec point(n);
        for (std::size_t j = 0; j < n; ++j) point[j] = x(static_cast<Eigen::Index>(j));
        if (constraint_violation(poly, point) > 1e-8) return;
        for (const Vec& seen : vertices) {
            Real diff = 0.0;
            for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(seen[j] - point[j]));
            if (diff <= 1e-8) return;
        }
        vertices.push_back(std::move(point));
    };

    if (free_dims == 0) {
        solve_candidate({});
        std::sort(vertices.begin(), vertices.end());
        return vertices;
    }
    if (pool < free_dims) return std::vector<Vec>{}; // unbounded direction; no vertices

    // Count combinations up front so pathological instances bail out cleanly.
    {
        long double combos = 1.0L;
        for (std::size_t i = 0; i < free_dims; ++i) {
            combos = combos * static_cast<long double>(pool - i) / static_cast<long double>(i + 1);
            if (combos > static_cast<long double>(limits.max_combinations)) return std::nullopt;
        }
    }

    std::vector<std::size_t> chosen(free_dims);
    for (std::size_t i = 0; i < free_dims; ++i) chosen[i] = i;
    while (true) {
        solve_candidate(chosen);
        if (vertices.size() > limits.max_vertices) return std::nullopt;
        // next combination in lexicographic order
        std::size_t i = free_dims;
        while (i > 0) {
            --i;
            if (chosen[i] + (free_dims - i) < pool) {
                ++chosen[i];
                for (std::size_t k = i + 1; k < free_dims; ++k) chosen[k] = chosen[k - 1] + 1;
                break;
            }
            if (i == 0) {
                std::sort(vertices.begin(), vertices.end());
                return vertices;
            }
        }
        if (free_dims == 0) break;
    }
    std::sort(vertices.begin(), vertices.end());
    return vertices;
}

} // namespace orbe
