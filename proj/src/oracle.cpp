#include "orbe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>

#include "orbe/geometry.hpp"
#include "orbe/rng.hpp"

namespace orbe {

namespace {

Real inf_dist(const Vec& a, const Vec& b) {
    Real d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Dirichlet(1,...,1) weights: normalized exponentials, uniform over the
/// simplex; falls back to uniform weights on a degenerate draw.
Vec convex_weights(std::mt19937_64& rng, std::size_t k) {
    Vec w(k, 0.0);
    Real total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        w[i] = -std::log1p(-unit_real(rng));
        total += w[i];
    }
    if (!(total > 0.0)) return Vec(k, 1.0 / static_cast<Real>(k));
    for (std::size_t i = 0; i < k; ++i) w[i] /= total;
    return w;
}

}  // namespace

std::vector<StateTransition> sample_uncertainty(const Rmdp& m, int state, int n,
                                                std::uint64_t seed) {
    if (state < 0 || state >= m.num_states)
        throw ValidationError("sample_uncertainty: state index out of range");
    if (n < 1) throw ValidationError("sample_uncertainty: need at least one sample");

    const PolytopeSet ps = state_as_polytope(m, state);
    const std::size_t dim = ps.hull.dim;

    std::mt19937_64 rng(seed);
    std::vector<Vec> stacked;
    stacked.reserve(static_cast<std::size_t>(n));

    std::vector<Vec> anchors;
    const auto verts = enumerate_vertices(ps.hull);
    if (verts && !verts->empty()) {
        anchors = *verts;
        if (anchors.size() * 2 <= static_cast<std::size_t>(n))
            for (const Vec& v : anchors) stacked.push_back(v);
    } else {
        // LP probes: optima of seeded random objectives are extreme points.
        if (ps.interior.feasible) anchors.push_back(ps.interior.point);
        const std::size_t probes = std::min<std::size_t>(2 * dim + 4, 32);
        for (std::size_t k = 0; k < probes; ++k) {
            Vec c(dim, 0.0);
            for (std::size_t j = 0; j < dim; ++j) c[j] = 2.0 * unit_real(rng) - 1.0;
            const LpResult opt = maximize_over(ps.hull, c);
            if (opt.status != LpStatus::Optimal) continue;
            bool fresh = true;
            for (const Vec& a : anchors)
                if (inf_dist(a, opt.x) <= 1e-8) { fresh = false; break; }
            if (fresh) anchors.push_back(opt.x);
        }
        if (anchors.empty())
            throw NumericError("sample_uncertainty: no feasible point found");
    }

    while (stacked.size() < static_cast<std::size_t>(n)) {
        const Vec w = convex_weights(rng, anchors.size());
        Vec x(dim, 0.0);
        for (std::size_t i = 0; i < anchors.size(); ++i)
            for (std::size_t j = 0; j < dim; ++j) x[j] += w[i] * anchors[i][j];
        stacked.push_back(std::move(x));
    }

    std::vector<StateTransition> out;
    out.reserve(stacked.size());
    for (const Vec& x : stacked) {
        StateTransition rows;
        ps.unpack(x, rows, m.num_actions, m.num_states);
        out.push_back(std::move(rows));
    }
    return out;
}

std::vector<TransitionKernel> sample_kernels(const Rmdp& m, int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample_kernels: need at least one sample");
    std::vector<std::vector<StateTransition>> per_state;
    per_state.reserve(static_cast<std::size_t>(m.num_states));
    for (int s = 0; s < m.num_states; ++s)
        per_state.push_back(sample_uncertainty(m, s, n, seed + 0x9e3779b97f4a7c15ull * (s + 1)));
    std::vector<TransitionKernel> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        TransitionKernel k;
        k.reserve(static_cast<std::size_t>(m.num_states));
        for (int s = 0; s < m.num_states; ++s)
            k.push_back(per_state[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = std::move(k);
    }
    return out;
}

std::optional<std::vector<TransitionKernel>> product_vertex_kernels(const Rmdp& m,
                                                                    std::size_t cap) {
    std::vector<std::vector<StateTransition>> options;
    options.reserve(static_cast<std::size_t>(m.num_states));
    std::size_t total = 1;
    for (int s = 0; s < m.num_states; ++s) {
        const PolytopeSet ps = state_as_polytope(m, s);
        const auto verts = enumerate_vertices(ps.hull);
        if (!verts || verts->empty()) return std::nullopt;
        std::vector<StateTransition> rows_options;
        rows_options.reserve(verts->size());
        for (const Vec& x : *verts) {
            StateTransition rows;
            ps.unpack(x, rows, m.num_actions, m.num_states);
            rows_options.push_back(std::move(rows));
        }
        if (total > cap / rows_options.size()) return std::nullopt;
        total *= rows_options.size();
        options.push_back(std::move(rows_options));
    }

    std::vector<TransitionKernel> out;
    out.reserve(total);
    std::vector<std::size_t> idx(static_cast<std::size_t>(m.num_states), 0);
    for (;;) {
        TransitionKernel k;
        k.reserve(static_cast<std::size_t>(m.num_states));
        for (int s = 0; s < m.num_states; ++s)
            k.push_back(options[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]]);
        out.push_back(std::move(k));
        int pos = m.num_states - 1;
        while (pos >= 0) {
            auto& i = idx[static_cast<std::size_t>(pos)];
            if (++i < options[static_cast<std::size_t>(pos)].size()) break;
            i = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return out;
}

const char* dominance_relation_name(DominanceRelation r) {
    switch (r) {
        case DominanceRelation::Equal: return "equal";
        case DominanceRelation::Dominates: return "dominates";
        case DominanceRelation::StrictlyDominates: return "strictly_dominates";
        case DominanceRelation::Dominated: return "dominated";
        case DominanceRelation::StrictlyDominated: return "strictly_dominated";
        case DominanceRelation::Incomparable: return "incomparable";
    }
    return "unknown";
}

DominanceVerdict dominance_check(const Rmdp& m, const Policy& piA, const Policy& piB,
                                 const std::vector<TransitionKernel>& samples, Real slack) {
    DominanceVerdict v;
    if (samples.empty()) return v;

    bool any_win = false, any_loss = false, any_weak_win = false, any_weak_loss = false;
    std::size_t best_idx = 0, worst_idx = 0;
    Real best_gap = 0.0, worst_gap = 0.0;

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Real rhoA = evaluate_policy_exact(m, piA, samples[i]);
        const Real rhoB = evaluate_policy_exact(m, piB, samples[i]);
        // Oriented so positive means A is better in the model's sense.
        const Real gap = (m.sense == Sense::Maximize) ? rhoA - rhoB : rhoB - rhoA;
        const Real tol = slack * (1.0 + std::max(std::abs(rhoA), std::abs(rhoB)));
        if (gap > tol) {
            if (!any_win || gap > best_gap) { best_gap = gap; best_idx = i; }
            any_win = true;
        } else if (gap < -tol) {
            if (!any_loss || gap < worst_gap) { worst_gap = gap; worst_idx = i; }
            any_loss = true;
        } else if (gap > 0.0) {
            any_weak_win = true;
        } else if (gap < 0.0) {
            any_weak_loss = true;
        }
    }

    if (any_win && any_loss) {
        v.relation = DominanceRelation::Incomparable;
        v.witness_better = samples[best_idx];
        v.witness_worse = samples[worst_idx];
        v.best_gap = best_gap;
        v.worst_gap = worst_gap;
    } else if (any_win) {
        v.relation = DominanceRelation::StrictlyDominates;
        v.witness_better = samples[best_idx];
        v.best_gap = best_gap;
    } else if (any_loss) {
        v.relation = DominanceRelation::StrictlyDominated;
        v.witness_worse = samples[worst_idx];
        v.worst_gap = worst_gap;
    } else if (any_weak_win && !any_weak_loss) {
        v.relation = DominanceRelation::Dominates;  // unreachable with the symmetric band
    } else if (any_weak_loss && !any_weak_win) {
        v.relation = DominanceRelation::Dominated;  // unreachable with the symmetric band
    } else {
        v.relation = DominanceRelation::Equal;
    }
    return v;
}

std::vector<Policy> enumerate_deterministic_policies(const Rmdp& m, std::uint64_t cap) {
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(m.num_states));
    std::uint64_t total = 1;
    bool saturated = false;
    for (int s = 0; s < m.num_states; ++s) {
        auto& cs = choices[static_cast<std::size_t>(s)];
        for (int a = 0; a < m.num_actions; ++a)
            if (m.is_enabled(s, a)) cs.push_back(a);
        if (cs.empty())
            throw ValidationError("state without enabled actions");
        const std::uint64_t k = cs.size();
        if (total > std::numeric_limits<std::uint64_t>::max() / k) saturated = true;
        else total *= k;
    }
    if (saturated || total > cap)
        throw ValidationError("policy space " +
                              (saturated ? std::string("overflow") : std::to_string(total)) +
                              " exceeds cap");

    std::vector<Policy> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(static_cast<std::size_t>(m.num_states), 0);
    for (;;) {
        Policy pi(static_cast<std::size_t>(m.num_states),
                  Vec(static_cast<std::size_t>(m.num_actions), 0.0));
        for (int s = 0; s < m.num_states; ++s) {
            const auto& cs = choices[static_cast<std::size_t>(s)];
            pi[static_cast<std::size_t>(s)]
              [static_cast<std::size_t>(cs[idx[static_cast<std::size_t>(s)]])] = 1.0;
        }
        out.push_back(std::move(pi));
        int pos = m.num_states - 1;
        while (pos >= 0) {
            auto& i = idx[static_cast<std::size_t>(pos)];
            if (++i < choices[static_cast<std::size_t>(pos)].size()) break;
            i = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return out;
}

ClassicalViResult classical_value_iteration(const Rmdp& m, const TransitionKernel& kernel,
                                            Real epsilon, int max_iterations) {
    const std::size_t S = static_cast<std::size_t>(m.num_states);
    const std::size_t A = static_cast<std::size_t>(m.num_actions);
    ClassicalViResult res;
    res.value.assign(S, 0.0);
    res.policy.assign(S, Vec(A, 0.0));

    Vec next(S, 0.0);
    std::vector<int> greedy(S, 0);
    for (int it = 0; it < max_iterations; ++it) {
        Real delta = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            bool have = false;
            Real best = 0.0;
            int best_a = 0;
            for (std::size_t a = 0; a < A; ++a) {
                if (!m.is_enabled(static_cast<int>(s), static_cast<int>(a))) continue;
                Real q = m.rewards[s][a];
                const Vec& row = kernel[s][a];
                for (std::size_t t = 0; t < S; ++t) q += m.gamma * row[t] * res.value[t];
                const bool better =
                    !have || (m.sense == Sense::Maximize ? q > best : q < best);
                if (better) { best = q; best_a = static_cast<int>(a); have = true; }
            }
            next[s] = best;
            greedy[s] = best_a;
            delta = std::max(delta, std::abs(next[s] - res.value[s]));
        }
        res.value = next;
        res.iterations = it + 1;
        if (delta <= epsilon) { res.converged = true; break; }
    }
    for (std::size_t s = 0; s < S; ++s)
        res.policy[s][static_cast<std::size_t>(greedy[s])] = 1.0;
    return res;
}

Real fd_directional_derivative(const Rmdp& m, const Policy& pi, const TransitionKernel& kernel,
                               int missing_state, const Direction& v, Real step) {
    if (missing_state < 0 || missing_state >= m.num_states)
        throw ValidationError("fd_directional_derivative: state index out of range");
    const std::size_t sb = static_cast<std::size_t>(missing_state);
    TransitionKernel shifted = kernel;

    const auto value_at = [&](Real sign) {
        shifted[sb] = kernel[sb];
        for (std::size_t a = 0; a < shifted[sb].size(); ++a)
            for (std::size_t t = 0; t < shifted[sb][a].size(); ++t)
                shifted[sb][a][t] += sign * step * v[a][t];
        Vec value;
        evaluate_policy_exact(m, pi, shifted, &value);
        return value[sb];
    };

    const Real plus = value_at(1.0);
    const Real minus = value_at(-1.0);
    return (plus - minus) / (2.0 * step);
}

}  // namespace orbe
