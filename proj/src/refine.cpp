// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/refine.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace orbe {

using nlohmann::json;

const char* orbe_stage_name(OrbeStage s) {
    switch (s) {
    case OrbeStage::MaxminUnique: return "maxmin-unique";
    case OrbeStage::MaxmaxUnique: return "maxmax-unique";
    case OrbeStage::DerivMax: return "deriv-max";
    case OrbeStage::DerivMin: return "deriv-min";
    }
    return "?";
}

namespace {

Real dot(const Vec& a, const Vec& b) {
    Real s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Minimum slack over the non-degenerate constraints at a point of the hull:
/// non-implicit inequality rows and non-pinned coordinate bounds.
Real min_strict_slack(const HPolytope& hull, const InteriorPointInfo& info, const Vec& x) {
    Real slack = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < hull.A.size(); ++i) {
        if (info.row_implicit[i]) continue;
        slack = std::min(slack, hull.b[i] - dot(hull.A[i], x));
    }
    for (std::size_t j = 0; j < hull.dim; ++j) {
        if (info.coord_pinned[j]) continue;
        slack = std::min(slack, x[j]);
    }
    return slack; // +inf when every constraint is an implicit equality
}

} // namespace

InteriorClass interior_condition(const Rmdp& m, int state, const StateTransition& p_worst,
                                 const StateTransition& p_best) {
    const PolytopeSet ps = state_as_polytope(m, state);
    const Vec x_best = ps.pack(p_best);
    const Vec x_worst = ps.pack(p_worst);
    const std::size_t n = ps.hull.dim;

    // Covering: the whole feasible set lies on the segment's line.  Zero
    // extent along every direction orthogonal to the segment is enough, as
    // the best anchor itself is a feasible point of the line.
    {
        Vec d(n);
        Real norm2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            d[k] = x_worst[k] - x_best[k];
            norm2 += d[k] * d[k];
        }
        const Real norm = std::sqrt(norm2);
        bool covering = true;
        for (std::size_t k = 0; k < n && covering; ++k) {
            Vec c(n, 0.0);
            c[k] = 1.0;
            if (norm > 1e-12) {
                for (std::size_t j = 0; j < n; ++j) c[j] -= d[k] / norm * d[j] / norm;
            }
            const LpResult hi = maximize_over(ps.hull, c);
            const LpResult lo = minimize_over(ps.hull, c);
            if (hi.status != LpStatus::Optimal || lo.status != LpStatus::Optimal) {
                covering = false;
                break;
            }
            covering = hi.objective - lo.objective <= 1e-8;
        }
        if (covering) return InteriorClass::Covering;
    }

    // Interior: some segment point is strictly slack in every non-degenerate
    // constraint.  The minimum slack along the segment is concave and
    // piecewise linear in lambda, so a ternary search finds its maximum.
    auto phi = [&](Real lam) {
        Vec x(n);
        for (std::size_t k = 0; k < n; ++k)
            x[k] = lam * x_worst[k] + (1.0 - lam) * x_best[k];
        return min_strict_slack(ps.hull, ps.interior, x);
    };
    Real lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const Real m1 = lo + (hi - lo) / 3.0;
        const Real m2 = hi - (hi - lo) / 3.0;
        if (phi(m1) < phi(m2))
            lo = m1;
        else
            hi = m2;
    }
    const Real best_slack = std::max({phi(0.0), phi(0.5 * (lo + hi)), phi(1.0)});
    if (best_slack > 1e-9) return InteriorClass::Interior;
    return InteriorClass::Violated;
}

StateTransition perturb_best_point(const Rmdp& m, int state, const StateTransition& p_worst,
                                   const StateTransition& p_best, Real step) {
    if (interior_condition(m, state, p_worst, p_best) != InteriorClass::Violated)
        return p_best;
    const PolytopeSet ps = state_as_polytope(m, state);
    if (!ps.interior.feasible)
        throw NumericError("no interior point exists for a set classified as violated");
    const Vec& c = ps.interior.point;
    Vec x = ps.pack(p_best);
    Real dist = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dist = std::max(dist, std::abs(c[k] - x[k]));
    if (dist <= 1e-15) return p_best;
    // Step toward the relative-interior point: any positive fraction of the
    // way lands strictly inside, so cap the move by the requested step and
    // by half the interior point's own slack.
    const Real move = std::min(step, 0.5 * ps.interior.slack);
    const Real theta = std::min(1.0, move / dist);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += theta * (c[k] - x[k]);
    StateTransition out;
    ps.unpack(x, out, m.num_actions, m.num_states);
    return out;
}

WorstBestPair worst_best_pair(const Rmdp& m, const std::vector<int>& actions,
                              const SolverConfig& cfg, const RobustSolution* warm_robust) {
    CandidateSet fixed(actions.size());
    for (std::size_t s = 0; s < actions.size(); ++s) fixed[s] = {actions[s]};

    const Adversary robust_dir = default_adversary(m);
    const Adversary best_dir = robust_dir == Adversary::Min ? Adversary::Max : Adversary::Min;

    RobustSolution worst =
        robust_value_iteration(m, cfg, robust_dir, &fixed,
                               warm_robust ? &warm_robust->value : nullptr,
                               warm_robust ? &warm_robust->worst_transition : nullptr);
    if (!worst.converged)
        throw ConvergenceError("fixed-policy robust evaluation did not converge");
    RobustSolution best = robust_value_iteration(m, cfg, best_dir, &fixed, &worst.value,
                                                 &worst.worst_transition);
    if (!best.converged)
        throw ConvergenceError("fixed-policy best-case evaluation did not converge");

    WorstBestPair pair;
    pair.worst_value = dot(m.initial, worst.value);
    pair.best_value = dot(m.initial, best.value);
    pair.worst = std::move(worst.worst_transition);
    pair.best = std::move(best.worst_transition);
    return pair;
}

CandidateSet derivative_stage(const Rmdp& m, const CandidateSet& candidates,
                              const std::vector<int>& reference, const WorstBestPair& pair,
                              bool at_worst, const OrbeConfig& cfg) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const Policy pi_ref = deterministic_policy(m, reference);
    const TransitionKernel& anchor = at_worst ? pair.worst : pair.best;
    // Keep the largest derivative at the worst anchor, the smallest at the
    // best anchor; both flip for minimize-sense models.
    const bool keep_max = at_worst == (m.sense == Sense::Maximize);

    const std::vector<FirstReturn> frs = first_return_all(m, pi_ref, anchor);

    CandidateSet out(S);
    for (std::size_t s = 0; s < S; ++s) {
        if (candidates[s].size() <= 1) {
            out[s] = candidates[s];
            continue;
        }
        Direction v(static_cast<std::size_t>(m.num_actions));
        Real vmax = 0.0;
        for (std::size_t a = 0; a < v.size(); ++a) {
            v[a].resize(S);
            for (std::size_t t = 0; t < S; ++t) {
                v[a][t] = pair.best[s][a][t] - pair.worst[s][a][t];
                vmax = std::max(vmax, std::abs(v[a][t]));
            }
        }
        if (vmax <= 1e-14) {
            out[s] = candidates[s]; // zero direction prunes nothing
            continue;
        }
        Vec score(candidates[s].size());
        Real extremal = 0.0;
        for (std::size_t i = 0; i < candidates[s].size(); ++i) {
            const RationalValueForm f =
                form_for_action(m, static_cast<int>(s), candidates[s][i], frs[s]);
            score[i] = directional_derivative(f, anchor[s], v);
            if (i == 0 || (keep_max ? score[i] > extremal : score[i] < extremal))
                extremal = score[i];
        }
        const Real tol = cfg.derivative_tolerance * (1.0 + std::abs(extremal));
        for (std::size_t i = 0; i < candidates[s].size(); ++i)
            if (std::abs(score[i] - extremal) <= tol) out[s].push_back(candidates[s][i]);
    }
    return out;
}

namespace {

bool all_singleton(const CandidateSet& c) {
    for (const auto& set : c)
        if (set.size() != 1) return false;
    return true;
}

std::vector<std::size_t> sizes_of(const CandidateSet& c) {
    std::vector<std::size_t> out;
    out.reserve(c.size());
    for (const auto& set : c) out.push_back(set.size());
    return out;
}

std::vector<int> first_member(const CandidateSet& c) {
    std::vector<int> out;
    out.reserve(c.size());
    for (const auto& set : c) out.push_back(set.front());
    return out;
}

} // namespace

OrbeReport compute_orbe(const Rmdp& m, const OrbeConfig& cfg) {
    using clock = std::chrono::steady_clock;
    const Real cand_tol =
        cfg.candidate_tolerance < 0.0 ? 10.0 * cfg.solver.epsilon : cfg.candidate_tolerance;

    OrbeReport report;
    auto stamp = [&](const char* name, clock::time_point t0) {
        const auto dt = std::chrono::duration<Real>(clock::now() - t0).count();
        report.stage_seconds.emplace_back(name, dt);
    };

    // Stage 1: robust optimum and the actions attaining it.
    auto t0 = clock::now();
    RobustSolution sol = robust_value_iteration(m, cfg.solver);
    if (!sol.converged)
        throw ConvergenceError("robust value iteration did not converge within its budget");
    CandidateSet cands = optimal_action_set(m, sol, cand_tol);
    report.robust_value = dot(m.initial, sol.value);
    report.candidate_counts.emplace_back("maxmin", sizes_of(cands));
    stamp("maxmin", t0);
    report.robust = sol;
    if (all_singleton(cands)) {
        report.stage_reached = OrbeStage::MaxminUnique;
        report.policy = deterministic_policy(m, first_member(cands));
        return report;
    }

    // Stage 2: among robust-optimal actions, those best when the uncertainty
    // cooperates; solved by the same alternating iteration with the opposite
    // adversary, warm-started from the robust fixed point.
    t0 = clock::now();
    const Adversary best_dir =
        sol.adversary == Adversary::Min ? Adversary::Max : Adversary::Min;
    RobustSolution sol_best = robust_value_iteration(m, cfg.solver, best_dir, &cands,
                                                     &sol.value, &sol.worst_transition);
    if (!sol_best.converged)
        throw ConvergenceError("best-case value iteration did not converge within its budget");
    cands = optimal_action_set(m, sol_best, cand_tol, &cands);
    report.candidate_counts.emplace_back("maxmax", sizes_of(cands));
    stamp("maxmax", t0);
    if (all_singleton(cands)) {
        report.stage_reached = OrbeStage::MaxmaxUnique;
        report.policy = deterministic_policy(m, first_member(cands));
        return report;
    }

    // Stages 3-4 share one reference member and its anchor pair.
    t0 = clock::now();
    const std::vector<int> reference = first_member(cands);
    WorstBestPair pair = worst_best_pair(m, reference, cfg.solver, &sol);

    // Interior condition per state; violated states get their best anchor
    // pulled toward the relative interior and re-anchored there.
    const auto S = static_cast<std::size_t>(m.num_states);
    report.interior_condition.assign(S, "");
    bool any_perturbed = false;
    for (std::size_t s = 0; s < S; ++s) {
        const InteriorClass cls =
            interior_condition(m, static_cast<int>(s), pair.worst[s], pair.best[s]);
        if (cls == InteriorClass::Interior) {
            report.interior_condition[s] = "interior";
        } else if (cls == InteriorClass::Covering) {
            report.interior_condition[s] = "covering";
        } else {
            pair.best[s] = perturb_best_point(m, static_cast<int>(s), pair.worst[s],
                                              pair.best[s], cfg.perturbation_step);
            report.interior_condition[s] = "perturbed";
            any_perturbed = true;
        }
    }
    if (any_perturbed) {
        // The best-side anchor changed; its value moves with it.
        const Policy pi_ref = deterministic_policy(m, reference);
        pair.best_value = evaluate_policy_exact(m, pi_ref, pair.best);
    }

    bool all_zero = true;
    for (std::size_t s = 0; s < S && all_zero; ++s)
        for (std::size_t a = 0; a < static_cast<std::size_t>(m.num_actions) && all_zero; ++a)
            for (std::size_t t = 0; t < S && all_zero; ++t)
                all_zero = std::abs(pair.best[s][a][t] - pair.worst[s][a][t]) <= 1e-12;
    if (all_zero) {
        // Degenerate uncertainty at the optimum: every direction vanishes,
        // so the derivative stages cannot prune anything.
        report.derivative_stages_skipped = true;
        report.candidate_counts.emplace_back("deriv-max", sizes_of(cands));
        report.candidate_counts.emplace_back("deriv-min", sizes_of(cands));
        stamp("deriv", t0);
        report.stage_reached = OrbeStage::DerivMin;
        report.policy = deterministic_policy(m, first_member(cands));
        report.final_set_nonsingleton = true;
        return report;
    }

    cands = derivative_stage(m, cands, reference, pair, /*at_worst=*/true, cfg);
    report.candidate_counts.emplace_back("deriv-max", sizes_of(cands));
    stamp("deriv-max", t0);
    if (all_singleton(cands)) {
        report.stage_reached = OrbeStage::DerivMax;
        report.policy = deterministic_policy(m, first_member(cands));
        return report;
    }

    t0 = clock::now();
    cands = derivative_stage(m, cands, reference, pair, /*at_worst=*/false, cfg);
    report.candidate_counts.emplace_back("deriv-min", sizes_of(cands));
    stamp("deriv-min", t0);
    report.stage_reached = OrbeStage::DerivMin;
    report.policy = deterministic_policy(m, first_member(cands));
    report.final_set_nonsingleton = !all_singleton(cands);
    return report;
}

std::string orbe_report_to_json_text(const OrbeReport& report, int indent) {
    json j;
    j["stage_reached"] = orbe_stage_name(report.stage_reached);
    json counts = json::array();
    for (const auto& [name, sizes] : report.candidate_counts)
        counts.push_back(json{{"stage", name}, {"counts", sizes}});
    j["candidate_counts"] = std::move(counts);
    j["policy"] = report.policy;
    j["robust_value"] = report.robust_value;
    if (!report.interior_condition.empty())
        j["interior_condition"] = report.interior_condition;
    json secs = json::array();
    for (const auto& [name, s] : report.stage_seconds)
        secs.push_back(json{{"stage", name}, {"seconds", s}});
    j["stage_seconds"] = std::move(secs);
    j["derivative_stages_skipped"] = report.derivative_stages_skipped;
    j["final_set_nonsingleton"] = report.final_set_nonsingleton;
    j["iterations"] = report.robust.iterations;
    j["converged"] = report.robust.converged;
    return j.dump(indent) + "\n";
}

} // namespace orbe
