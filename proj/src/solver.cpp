// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace orbe {

namespace {

Real dot(const Vec& a, const Vec& b) {
    Real s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool better(Real candidate, Real incumbent, Sense sense) {
    return sense == Sense::Maximize ? candidate > incumbent : candidate < incumbent;
}

} // namespace

Adversary default_adversary(const Rmdp& m) {
    return m.sense == Sense::Maximize ? Adversary::Min : Adversary::Max;
}

namespace {

std::vector<std::size_t> saturation_order(const Vec& weights, Adversary direction) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (direction == Adversary::Min) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return weights[i] < weights[j]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return weights[i] > weights[j]; });
    }
    return order;
}

Vec saturate_in_order(const Vec& lower, const Vec& upper,
                      const std::vector<std::size_t>& order) {
    Vec x = lower;
    Real budget = 1.0;
    for (Real l : lower) budget -= l;
    for (std::size_t k = 0; k < order.size() && budget > 0.0; ++k) {
        const std::size_t i = order[k];
        const Real add = std::min(budget, upper[i] - lower[i]);
        if (add > 0.0) {
            x[i] += add;
            budget -= add;
        }
    }
    return x;
}

} // namespace

Vec sort_and_saturate(const Vec& lower, const Vec& upper, const Vec& weights,
                      Adversary direction) {
    return saturate_in_order(lower, upper, saturation_order(weights, direction));
}

std::pair<StateTransition, Real> inner_optimize_state(const Rmdp& m, int s, const Vec& pi_s,
                                                      const Vec& v, Adversary direction,
                                                      Real lp_tol) {
    const auto su = static_cast<std::size_t>(s);
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    const UncertaintySet& u = m.uncertainty[su];

    Real base = 0.0;
    for (std::size_t a = 0; a < A; ++a) base += pi_s[a] * m.rewards[su][a];

    StateTransition rows(A, Vec(S, 0.0));
    if (u.kind == UncertaintySet::Kind::Interval) {
        // Per-action boxes are independent, so every enabled row optimizes on
        // its own; the saturation order depends only on v and is shared.
        const std::vector<std::size_t> order = saturation_order(v, direction);
        Real obj = base;
        for (std::size_t a = 0; a < A; ++a) {
            if (!m.enabled[su][a]) continue;
            rows[a] = saturate_in_order(u.interval.lower[a], u.interval.upper[a], order);
            if (pi_s[a] != 0.0) obj += m.gamma * pi_s[a] * dot(rows[a], v);
        }
        return {std::move(rows), obj};
    }

    const PolytopeSet& ps = u.polytope;
    Vec c(ps.support.size(), 0.0);
    for (std::size_t k = 0; k < ps.support.size(); ++k) {
        const auto a = static_cast<std::size_t>(ps.support[k].first);
        c[k] = m.gamma * pi_s[a] * v[static_cast<std::size_t>(ps.support[k].second)];
    }
    const LpResult res = direction == Adversary::Min ? minimize_over(ps.hull, c, lp_tol)
                                                     : maximize_over(ps.hull, c, lp_tol);
    if (res.status != LpStatus::Optimal)
        throw NumericError("inner optimization failed on a validated uncertainty set");
    ps.unpack(res.x, rows, m.num_actions, m.num_states);
    return {std::move(rows), base + res.objective};
}

RobustSolution robust_value_iteration(const Rmdp& m, const SolverConfig& cfg,
                                      Adversary adversary,
                                      const CandidateSet* restriction,
                                      const Vec* warm_value,
                                      const TransitionKernel* warm_kernel) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);

    std::vector<std::vector<int>> allowed(S);
    for (std::size_t s = 0; s < S; ++s) {
        if (restriction) {
            allowed[s] = (*restriction)[s];
            if (allowed[s].empty())
                throw ValidationError("restriction leaves a state with no action");
            for (int a : allowed[s])
                if (a < 0 || a >= m.num_actions || !m.enabled[s][static_cast<std::size_t>(a)])
                    throw ValidationError("restriction names a disabled action");
        } else {
            for (int a = 0; a < m.num_actions; ++a)
                if (m.enabled[s][static_cast<std::size_t>(a)]) allowed[s].push_back(a);
        }
    }

    Vec v_prev = warm_value ? *warm_value : Vec(S, 0.0);
    TransitionKernel P = warm_kernel ? *warm_kernel : nominal_kernel(m);
    std::vector<int> act(S, -1);

    RobustSolution sol;
    sol.adversary = adversary;

    Vec v_new(S, 0.0);
    Vec pi_s(A, 0.0);
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        // One Jacobi sweep of the robust Bellman operator: every action's
        // worst (or best) case is re-optimized at v_prev before the greedy
        // choice, so each sweep is a gamma-contraction on the value vector.
        Real delta = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            Real best = 0.0;
            int best_a = -1;
            StateTransition best_rows;
            for (int a : allowed[s]) {
                std::fill(pi_s.begin(), pi_s.end(), 0.0);
                pi_s[static_cast<std::size_t>(a)] = 1.0;
                auto [rows, q] = inner_optimize_state(m, static_cast<int>(s), pi_s, v_prev,
                                                      adversary, cfg.inner_lp_tolerance);
                // First index wins ties: only a strict improvement beyond the
                // tie window replaces the incumbent.
                if (best_a < 0 ||
                    (better(q, best, m.sense) &&
                     std::abs(q - best) > cfg.action_tie_tolerance * (1.0 + std::abs(best)))) {
                    best = q;
                    best_a = a;
                    best_rows = std::move(rows);
                }
            }
            act[s] = best_a;
            v_new[s] = best;
            P[s] = std::move(best_rows);
            delta = std::max(delta, std::abs(v_new[s] - v_prev[s]));
        }
        sol.sweep_deltas.push_back(delta);

        v_prev = v_new;
        sol.iterations = iter;
        if (delta <= cfg.epsilon) {
            sol.converged = true;
            break;
        }
    }

    if (!sol.converged) {
        // A 2-periodic tail in the sweep deltas is the signature of the
        // alternating scheme oscillating between two policy/kernel pairs.
        const auto& d = sol.sweep_deltas;
        if (d.size() >= 6) {
            bool periodic = true;
            for (std::size_t k = d.size() - 4; k < d.size(); ++k) {
                const Real a = d[k], b = d[k - 2];
                if (std::abs(a - b) > 1e-3 * (1.0 + std::max(std::abs(a), std::abs(b)))) {
                    periodic = false;
                    break;
                }
            }
            sol.oscillation_warning = periodic && d.back() > cfg.epsilon;
        }
    }

    sol.value = std::move(v_prev);
    std::vector<int> act_int(act.begin(), act.end());
    sol.policy = deterministic_policy(m, act_int);
    sol.worst_transition = std::move(P);
    return sol;
}

RobustSolution robust_value_iteration(const Rmdp& m, const SolverConfig& cfg) {
    return robust_value_iteration(m, cfg, default_adversary(m), nullptr, nullptr, nullptr);
}

CandidateSet optimal_action_set(const Rmdp& m, const RobustSolution& sol, Real tol,
                                const CandidateSet* restriction) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    CandidateSet out(S);
    Vec pi_s(A, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<int> pool;
        if (restriction) {
            pool = (*restriction)[s];
        } else {
            for (int a = 0; a < m.num_actions; ++a)
                if (m.enabled[s][static_cast<std::size_t>(a)]) pool.push_back(a);
        }
        Vec q(A, 0.0);
        Real best = 0.0;
        bool first = true;
        for (int ai : pool) {
            const auto a = static_cast<std::size_t>(ai);
            std::fill(pi_s.begin(), pi_s.end(), 0.0);
            pi_s[a] = 1.0;
            q[a] = inner_optimize_state(m, static_cast<int>(s), pi_s, sol.value, sol.adversary)
                       .second;
            if (first || better(q[a], best, m.sense)) {
                best = q[a];
                first = false;
            }
        }
        for (int ai : pool) {
            const auto a = static_cast<std::size_t>(ai);
            const bool keep = m.sense == Sense::Maximize ? q[a] >= best - tol : q[a] <= best + tol;
            if (keep) out[s].push_back(ai);
        }
    }
    return out;
}

} // namespace orbe
