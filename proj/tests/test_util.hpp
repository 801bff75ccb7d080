// Helpers shared by the test binaries: fixture paths, small model builders,
// and seeded random-model generators used by the property tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "orbe/model.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(ORBE_FIXTURE_DIR) + "/" + name;
}

/// Two-state model with one coupled slip parameter xi in [0, 0.5]: state 0
/// earns nothing and has two actions that reach state 1 with probability xi
/// (action 0) or 2*xi (action 1), tied through one equality; state 1 earns 1
/// per step and returns to state 0 with probability 1/2.  The worst case
/// (xi = 0) makes state 0 worthless under every policy, so both actions are
/// robust-optimal, but action 1 is strictly better at every xi > 0.
inline orbe::Rmdp coupled_two_state() {
    orbe::Rmdp m;
    m.num_states = 2;
    m.num_actions = 2;
    m.gamma = 0.9;
    m.sense = orbe::Sense::Maximize;
    m.initial = {1.0, 0.0};
    m.rewards = {{0.0, 0.0}, {1.0, 1.0}};
    m.enabled = {{1, 1}, {1, 0}};

    orbe::UncertaintySet u0;
    u0.kind = orbe::UncertaintySet::Kind::Polytope;
    u0.polytope.support = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    u0.polytope.Aeq = {{0.0, 1.0, 0.0, -0.5}};  // jump(action 0) = jump(action 1)/2
    u0.polytope.beq = {0.0};

    orbe::UncertaintySet u1;
    u1.kind = orbe::UncertaintySet::Kind::Interval;
    u1.interval.lower = {{0.5, 0.5}, {0.0, 0.0}};
    u1.interval.upper = {{0.5, 0.5}, {0.0, 0.0}};

    m.uncertainty = {u0, u1};
    orbe::validate_model(m);
    return m;
}

/// The same two states with the slip parameter pinned at its maximum 0.5:
/// a plain MDP where action 1 at state 0 yields return 6.2069... and
/// action 0 yields 4.5 (closed forms of the 2x2 linear systems).
inline orbe::Rmdp coupled_two_state_pinned() {
    orbe::Rmdp m;
    m.num_states = 2;
    m.num_actions = 2;
    m.gamma = 0.9;
    m.sense = orbe::Sense::Maximize;
    m.initial = {1.0, 0.0};
    m.rewards = {{0.0, 0.0}, {1.0, 1.0}};
    m.enabled = {{1, 1}, {1, 0}};

    orbe::UncertaintySet u0;
    u0.kind = orbe::UncertaintySet::Kind::Interval;
    u0.interval.lower = {{0.5, 0.5}, {0.0, 1.0}};
    u0.interval.upper = {{0.5, 0.5}, {0.0, 1.0}};

    orbe::UncertaintySet u1;
    u1.kind = orbe::UncertaintySet::Kind::Interval;
    u1.interval.lower = {{0.5, 0.5}, {0.0, 0.0}};
    u1.interval.upper = {{0.5, 0.5}, {0.0, 0.0}};

    m.uncertainty = {u0, u1};
    orbe::validate_model(m);
    return m;
}

/// A random interval model: every action's row gets a random distribution
/// as its center and per-entry widths, so lower <= center <= upper keeps the
/// set nonempty by construction.  Rewards are uniform in [0, 1].
inline orbe::Rmdp random_interval_rmdp(std::mt19937_64& rng, int num_states, int num_actions,
                                       orbe::Sense sense = orbe::Sense::Maximize,
                                       double max_width = 0.3, double gamma = 0.9) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    orbe::Rmdp m;
    m.num_states = num_states;
    m.num_actions = num_actions;
    m.gamma = gamma;
    m.sense = sense;
    const auto S = static_cast<std::size_t>(num_states);
    const auto A = static_cast<std::size_t>(num_actions);
    m.initial.assign(S, 1.0 / static_cast<double>(num_states));
    m.rewards.assign(S, orbe::Vec(A, 0.0));
    m.enabled.assign(S, std::vector<char>(A, 1));
    m.uncertainty.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) m.rewards[s][a] = unit(rng);
        orbe::UncertaintySet& u = m.uncertainty[s];
        u.kind = orbe::UncertaintySet::Kind::Interval;
        u.interval.lower.assign(A, orbe::Vec(S, 0.0));
        u.interval.upper.assign(A, orbe::Vec(S, 0.0));
        for (std::size_t a = 0; a < A; ++a) {
            orbe::Vec center(S, 0.0);
            double total = 0.0;
            for (std::size_t t = 0; t < S; ++t) {
                center[t] = -std::log(1.0 - unit(rng) * (1.0 - 1e-12));
                total += center[t];
            }
            for (std::size_t t = 0; t < S; ++t) {
                center[t] /= total;
                const double w = unit(rng) * max_width;
                u.interval.lower[a][t] = std::max(0.0, center[t] - w);
                u.interval.upper[a][t] = std::min(1.0, center[t] + w);
            }
        }
    }
    orbe::validate_model(m);
    return m;
}

/// Largest absolute difference between two equally sized vectors.
inline double max_abs_diff(const orbe::Vec& a, const orbe::Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// The action a one-hot (or near-one-hot) policy row selects.
inline int chosen_action(const orbe::Vec& row) {
    int best = 0;
    for (std::size_t a = 1; a < row.size(); ++a)
        if (row[a] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

}  // namespace testutil
