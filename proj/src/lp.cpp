// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/lp.hpp"

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace orbe {

namespace {

// Dense simplex tableau:
//   columns: structural vars | slacks | artificials | rhs
//   rows:    constraints | objective
// Phase 1 minimizes the sum of artificials, phase 2 the user objective.
class SimplexTableau {
public:
    SimplexTableau(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
                   const Vec& c, Real tol)
        : n_(c.size()), m_(A.size() + Aeq.size()), tol_(tol) {
        n_slack_ = A.size();
        n_art_ = 0;
        // Artificials are needed for equality rows and for inequality rows
        // whose slack would start negative (rhs < 0 after normalization).
        std::vector<int> art_row;
        rows_.assign(m_, Vec(n_ + n_slack_, 0.0));
        rhs_.assign(m_, 0.0);
        for (std::size_t i = 0; i < A.size(); ++i) {
            assert(A[i].size() == n_);
            for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = A[i][j];
            rows_[i][n_ + i] = 1.0;
            rhs_[i] = b[i];
        }
        for (std::size_t i = 0; i < Aeq.size(); ++i) {
            assert(Aeq[i].size() == n_);
            for (std::size_t j = 0; j < n_; ++j) rows_[A.size() + i][j] = Aeq[i][j];
            rhs_[A.size() + i] = beq[i];
        }
        // Normalize to nonnegative rhs.
        for (std::size_t i = 0; i < m_; ++i) {
            if (rhs_[i] < 0.0) {
                for (auto& v : rows_[i]) v = -v;
                rhs_[i] = -rhs_[i];
            }
        }
        // Choose the starting basis: a slack column if it survived the sign
        // flip with +1, otherwise an artificial.
        basis_.assign(m_, -1);
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (rows_[i][n_ + i] > 0.5) basis_[i] = static_cast<int>(n_ + i);
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < 0) art_row.push_back(static_cast<int>(i));
        }
        n_art_ = art_row.size();
        for (auto& row : rows_) row.resize(n_ + n_slack_ + n_art_, 0.0);
        for (std::size_t k = 0; k < n_art_; ++k) {
            rows_[art_row[k]][n_ + n_slack_ + k] = 1.0;
            basis_[art_row[k]] = static_cast<int>(n_ + n_slack_ + k);
        }
        c_ = c;
    }

    LpResult solve() {
        LpResult res;
        if (n_art_ > 0) {
            // Phase 1: minimize the sum of artificial variables.
            Vec obj(total_cols(), 0.0);
            for (std::size_t k = 0; k < n_art_; ++k) obj[n_ + n_slack_ + k] = 1.0;
            if (!run_phase(obj, /*restrict_art=*/false)) {
                // Phase 1 of a bounded-below objective cannot be unbounded.
                res.status = LpStatus::Infeasible;
                return res;
            }
            if (phase_objective(obj) > 1e-7) {
                res.status = LpStatus::Infeasible;
                return res;
            }
            drive_out_artificials();
        }
        Vec obj(total_cols(), 0.0);
        for (std::size_t j = 0; j < n_; ++j) obj[j] = c_[j];
        if (!run_phase(obj, /*restrict_art=*/true)) {
            res.status = LpStatus::Unbounded;
            return res;
        }
        res.status = LpStatus::Optimal;
        res.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= 0 && static_cast<std::size_t>(basis_[i]) < n_)
                res.x[basis_[i]] = rhs_[i];
        }
        res.objective = 0.0;
        for (std::size_t j = 0; j < n_; ++j) res.objective += c_[j] * res.x[j];
        return res;
    }

private:
    std::size_t total_cols() const { return n_ + n_slack_ + n_art_; }

    Real phase_objective(const Vec& obj) const {
        Real v = 0.0;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] >= 0) v += obj[basis_[i]] * rhs_[i];
        return v;
    }

    // Reduced costs for the given objective under the current basis.
    void reduced_costs(const Vec& obj, Vec& red) const {
        red = obj;
        for (std::size_t i = 0; i < m_; ++i) {
            const Real cb = obj[basis_[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < total_cols(); ++j) red[j] -= cb * rows_[i][j];
        }
    }

    // Runs the simplex loop for one objective.  Returns false on unbounded.
    bool run_phase(const Vec& obj, bool restrict_art) {
        Vec red;
        const std::size_t stall_limit = 2 * (m_ + total_cols());
        std::size_t iters_since_gain = 0;
        Real last_obj = phase_objective(obj);
        const std::size_t hard_limit = 50000;
        for (std::size_t iter = 0; iter < hard_limit; ++iter) {
            reduced_costs(obj, red);
            const bool bland = iters_since_gain > stall_limit;
            int enter = -1;
            Real best = -tol_;
            for (std::size_t j = 0; j < total_cols(); ++j) {
                if (restrict_art && j >= n_ + n_slack_) continue; // keep artificials out
                if (red[j] < best) {
                    if (bland) { enter = static_cast<int>(j); break; }
                    best = red[j];
                    enter = static_cast<int>(j);
                }
            }
            if (enter < 0) return true; // optimal for this phase
            // Ratio test.  Ties go to the smallest row index, or under Bland
            // to the smallest basic-variable index (the anti-cycling rule).
            int leave = -1;
            Real best_ratio = std::numeric_limits<Real>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const Real a = rows_[i][enter];
                if (a > tol_) {
                    const Real ratio = rhs_[i] / a;
                    if (ratio < best_ratio - 1e-12) {
                        best_ratio = ratio;
                        leave = static_cast<int>(i);
                    } else if (bland && leave >= 0 && ratio <= best_ratio + 1e-12 &&
                               basis_[i] < basis_[leave]) {
                        leave = static_cast<int>(i);
                    }
                }
            }
            if (leave < 0) return false; // unbounded direction
            pivot(static_cast<std::size_t>(leave), static_cast<std::size_t>(enter));
            const Real now = phase_objective(obj);
            if (now < last_obj - 1e-12) {
                iters_since_gain = 0;
                last_obj = now;
            } else {
                ++iters_since_gain;
            }
        }
        throw std::runtime_error("simplex iteration limit exceeded");
    }

    void pivot(std::size_t r, std::size_t col) {
        const Real piv = rows_[r][col];
        const Real inv = 1.0 / piv;
        for (auto& v : rows_[r]) v *= inv;
        rhs_[r] *= inv;
        rows_[r][col] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const Real f = rows_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < total_cols(); ++j) rows_[i][j] -= f * rows_[r][j];
            rows_[i][col] = 0.0;
            rhs_[i] -= f * rhs_[r];
            if (rhs_[i] < 0.0 && rhs_[i] > -1e-11) rhs_[i] = 0.0;
        }
        basis_[r] = static_cast<int>(col);
    }

    // After phase 1, pivot remaining (degenerate) artificials out of the
    // basis where possible.  A row whose artificial cannot be pivoted out is
    // a redundant constraint and is dropped so it can never accumulate an
    // infeasibility during phase 2.
    void drive_out_artificials() {
        std::vector<std::size_t> drop;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < 0 || static_cast<std::size_t>(basis_[i]) < n_ + n_slack_) continue;
            int enter = -1;
            for (std::size_t j = 0; j < n_ + n_slack_; ++j) {
                if (std::fabs(rows_[i][j]) > 1e-8) { enter = static_cast<int>(j); break; }
            }
            if (enter >= 0)
                pivot(i, static_cast<std::size_t>(enter));
            else
                drop.push_back(i);
        }
        for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
            rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(*it));
            rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(*it));
            basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(*it));
            --m_;
        }
    }

    std::size_t n_, m_, n_slack_ = 0, n_art_ = 0;
    Real tol_;
    Mat rows_;
    Vec rhs_;
    Vec c_;
    std::vector<int> basis_;
};

} // namespace

LpResult solve_lp(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
                  const Vec& c, Real tol) {
    assert(A.size() == b.size());
    assert(Aeq.size() == beq.size());
    SimplexTableau tab(A, b, Aeq, beq, c, tol);
    return tab.solve();
}

LpResult solve_lp_max(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
                      const Vec& c, Real tol) {
    Vec neg(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) neg[i] = -c[i];
    LpResult res = solve_lp(A, b, Aeq, beq, neg, tol);
    res.objective = -res.objective;
    return res;
}

} // namespace orbe
