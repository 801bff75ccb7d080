// Tests for the one-state rational value form, its derivatives, and the
// segment-equivalence check.
#include <cmath>
#include <random>

#include "doctest.h"
#include "orbe/model.hpp"
#include "orbe/oracle.hpp"
#include "orbe/rational.hpp"
#include "test_util.hpp"

using namespace orbe;

namespace {

/// A zero-sum random direction over a state's rows (feasible for the affine
/// hull of the per-action simplices).
Direction random_direction(std::mt19937_64& rng, std::size_t actions, std::size_t states) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Direction v(actions, Vec(states, 0.0));
    for (std::size_t a = 0; a < actions; ++a) {
        double mean = 0.0;
        for (std::size_t t = 0; t < states; ++t) {
            v[a][t] = unit(rng);
            mean += v[a][t];
        }
        mean /= static_cast<double>(states);
        for (std::size_t t = 0; t < states; ++t) v[a][t] -= mean;
    }
    return v;
}

}  // namespace

TEST_CASE("first-return quantities of the pinned two-state chain") {
    Rmdp m = testutil::coupled_two_state_pinned();
    TransitionKernel P = nominal_kernel(m);
    Policy pi = deterministic_policy(m, {1, 0});
    FirstReturn fr = first_return(m, pi, P, 0);
    // From state 1 the chain pays 1 per step and returns to state 0 with
    // probability 1/2: u = 1/(1 - gamma/2), h = (gamma/2)/(1 - gamma/2).
    CHECK(fr.u[0] == doctest::Approx(0.0));
    CHECK(fr.h[0] == doctest::Approx(1.0));
    CHECK(fr.u[1] == doctest::Approx(1.0 / 0.55).epsilon(1e-10));
    CHECK(fr.h[1] == doctest::Approx(0.45 / 0.55).epsilon(1e-10));
}

TEST_CASE("rational form reproduces the closed-form value") {
    Rmdp m = testutil::coupled_two_state_pinned();
    TransitionKernel P = nominal_kernel(m);
    Policy pi = deterministic_policy(m, {1, 0});
    RationalValueForm f = rational_coefficients(m, pi, P, 0);
    // At the nominal completion (jump probability one) the value at state 0
    // is 6.2069...; at jump probability 1/2 it is 4.5.
    StateTransition full_jump = {{0.5, 0.5}, {0.0, 1.0}};
    CHECK(rational_value(f, full_jump) == doctest::Approx(6.206896551724138).epsilon(1e-9));
    StateTransition half_jump = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK(rational_value(f, half_jump) == doctest::Approx(4.5).epsilon(1e-9));
}

TEST_CASE("batch coefficients match the per-state construction") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        Rmdp m = testutil::random_interval_rmdp(rng, 5, 3);
        TransitionKernel P = sample_kernels(m, 1, 1000 + trial)[0];
        std::vector<int> actions(5);
        for (int s = 0; s < 5; ++s) actions[s] = static_cast<int>(rng() % 3);
        Policy pi = deterministic_policy(m, actions);
        std::vector<RationalValueForm> all = rational_coefficients_all(m, pi, P);
        REQUIRE(all.size() == 5);
        for (int sbar = 0; sbar < 5; ++sbar) {
            RationalValueForm one = rational_coefficients(m, pi, P, sbar);
            CHECK(one.base_reward == doctest::Approx(all[sbar].base_reward).epsilon(1e-9));
            for (std::size_t a = 0; a < one.alpha.size(); ++a)
                for (std::size_t t = 0; t < one.alpha[a].size(); ++t) {
                    CHECK(one.alpha[a][t] ==
                          doctest::Approx(all[sbar].alpha[a][t]).epsilon(1e-8));
                    CHECK(one.beta[a][t] ==
                          doctest::Approx(all[sbar].beta[a][t]).epsilon(1e-8));
                }
        }
    }
}

TEST_CASE("batched first-return quantities match the single-state solve") {
    std::mt19937_64 rng(111);
    Rmdp m = testutil::random_interval_rmdp(rng, 6, 2);
    TransitionKernel P = sample_kernels(m, 1, 77)[0];
    Policy pi = deterministic_policy(m, {0, 1, 0, 1, 0, 1});
    std::vector<FirstReturn> all = first_return_all(m, pi, P);
    REQUIRE(all.size() == 6);
    for (int sbar = 0; sbar < 6; ++sbar) {
        FirstReturn one = first_return(m, pi, P, sbar);
        CHECK(testutil::max_abs_diff(one.u, all[sbar].u) < 1e-8);
        CHECK(testutil::max_abs_diff(one.h, all[sbar].h) < 1e-8);
    }
}

TEST_CASE("rational value equals a direct solve at random completions") {
    std::mt19937_64 rng(131);
    int models = 0;
    while (models < 12) {
        const int S = 2 + static_cast<int>(rng() % 5);
        const int A = 1 + static_cast<int>(rng() % 3);
        Rmdp m = testutil::random_interval_rmdp(rng, S, A);
        TransitionKernel P = sample_kernels(m, 1, 500 + models)[0];
        std::vector<int> actions(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) actions[static_cast<std::size_t>(s)] =
            static_cast<int>(rng() % static_cast<std::uint64_t>(A));
        Policy pi = deterministic_policy(m, actions);
        const int sbar = static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        RationalValueForm f = rational_coefficients(m, pi, P, sbar);
        auto completions = sample_uncertainty(m, sbar, 10, 900 + models);
        for (const StateTransition& rows : completions) {
            TransitionKernel Q = P;
            Q[static_cast<std::size_t>(sbar)] = rows;
            Vec value;
            evaluate_policy_exact(m, pi, Q, &value);
            const Real direct = value[static_cast<std::size_t>(sbar)];
            CHECK(rational_value(f, rows) == doctest::Approx(direct).epsilon(1e-9));
        }
        ++models;
    }
}

TEST_CASE("analytic derivative matches central differences") {
    std::mt19937_64 rng(151);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 2 + static_cast<int>(rng() % 4);
        const int A = 1 + static_cast<int>(rng() % 3);
        Rmdp m = testutil::random_interval_rmdp(rng, S, A);
        TransitionKernel P = sample_kernels(m, 1, 600 + trial)[0];
        std::vector<int> actions(static_cast<std::size_t>(S), 0);
        Policy pi = deterministic_policy(m, actions);
        const int sbar = static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        RationalValueForm f = rational_coefficients(m, pi, P, sbar);
        Direction v = random_direction(rng, static_cast<std::size_t>(A),
                                       static_cast<std::size_t>(S));
        StateTransition at = P[static_cast<std::size_t>(sbar)];
        const Real analytic = directional_derivative(f, at, v);
        const Real numeric = fd_directional_derivative(m, pi, P, sbar, v);
        const Real scale = std::max(1.0, std::abs(analytic));
        CHECK(std::abs(analytic - numeric) / scale < 1e-5);
    }
}

TEST_CASE("segment equivalence accepts identical forms and rejects shifts") {
    Rmdp m = testutil::coupled_two_state_pinned();
    TransitionKernel P = nominal_kernel(m);
    Policy pi = deterministic_policy(m, {1, 0});
    RationalValueForm f = rational_coefficients(m, pi, P, 0);
    RationalValueForm g = f;
    StateTransition p1 = {{0.5, 0.5}, {0.0, 1.0}};
    StateTransition p2 = {{0.5, 0.5}, {0.5, 0.5}};
    CHECK(segment_equivalence_check(f, g, p1, p2, 1e-9));
    g.base_reward += 1e-3;
    CHECK_FALSE(segment_equivalence_check(f, g, p1, p2, 1e-7));
}

TEST_CASE("endpoint agreement in value and derivative forces the segment") {
    // Property behind the equivalence check: two degree-one rational forms
    // that agree in value and directional derivative at both endpoints agree
    // at every interior point of the segment.
    std::mt19937_64 rng(171);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int S = 3 + static_cast<int>(rng() % 3);
        Rmdp m = testutil::random_interval_rmdp(rng, S, 2);
        TransitionKernel P = sample_kernels(m, 1, 700 + trial)[0];
        std::vector<int> actions(static_cast<std::size_t>(S), 0);
        Policy pi = deterministic_policy(m, actions);
        const int sbar = static_cast<int>(rng() % static_cast<std::uint64_t>(S));
        RationalValueForm f = rational_coefficients(m, pi, P, sbar);
        auto pts = sample_uncertainty(m, sbar, 4, 800 + trial);
        REQUIRE(pts.size() >= 2);
        const StateTransition& p1 = pts[0];
        const StateTransition& p2 = pts[1];
        REQUIRE(segment_equivalence_check(f, f, p1, p2, 1e-9));
        for (int k = 0; k < 50; ++k) {
            const double t = unit(rng);
            StateTransition mid = p1;
            for (std::size_t a = 0; a < mid.size(); ++a)
                for (std::size_t s2 = 0; s2 < mid[a].size(); ++s2)
                    mid[a][s2] = (1.0 - t) * p1[a][s2] + t * p2[a][s2];
            TransitionKernel Q = P;
            Q[static_cast<std::size_t>(sbar)] = mid;
            Vec value;
            evaluate_policy_exact(m, pi, Q, &value);
            CHECK(rational_value(f, mid) ==
                  doctest::Approx(value[static_cast<std::size_t>(sbar)]).epsilon(1e-7));
        }
    }
}

TEST_CASE("form substitution swaps the missing state's action") {
    Rmdp m = testutil::coupled_two_state_pinned();
    TransitionKernel P = nominal_kernel(m);
    Policy pi = deterministic_policy(m, {0, 0});  // reference plays action 0
    FirstReturn fr = first_return(m, pi, P, 0);
    RationalValueForm swapped = form_for_action(m, 0, 1, fr);
    // With action 1 substituted at state 0 the value matches the
    // always-second-action policy.
    StateTransition rows = P[0];
    CHECK(rational_value(swapped, rows) == doctest::Approx(6.206896551724138).epsilon(1e-9));
}

TEST_CASE("denominator stays positive across the set") {
    std::mt19937_64 rng(191);
    Rmdp m = testutil::random_interval_rmdp(rng, 4, 2);
    TransitionKernel P = sample_kernels(m, 1, 55)[0];
    Policy pi = deterministic_policy(m, {0, 1, 0, 1});
    RationalValueForm f = rational_coefficients(m, pi, P, 2);
    for (const StateTransition& rows : sample_uncertainty(m, 2, 25, 66)) {
        Real denom = 1.0;
        for (std::size_t a = 0; a < f.beta.size(); ++a)
            for (std::size_t t = 0; t < f.beta[a].size(); ++t)
                denom -= f.beta[a][t] * rows[a][t];
        CHECK(denom > 1e-3);
    }
}
