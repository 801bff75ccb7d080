// Tests for the brute-force verification helpers: set sampling, dominance
// classification, policy enumeration, classical value iteration, and the
// finite-difference derivative probe.
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "orbe/model.hpp"
#include "orbe/oracle.hpp"
#include "orbe/rational.hpp"
#include "orbe/solver.hpp"
#include "test_util.hpp"

using namespace orbe;
using testutil::fixture_path;

namespace {

bool contains_rows(const std::vector<StateTransition>& samples, const StateTransition& rows,
                   double tol) {
    for (const StateTransition& s : samples) {
        double d = 0.0;
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t t = 0; t < rows[a].size(); ++t)
                d = std::max(d, std::abs(s[a][t] - rows[a][t]));
        if (d <= tol) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("sampling a point set repeats the point") {
    Rmdp m = testutil::coupled_two_state_pinned();
    auto samples = sample_uncertainty(m, 1, 5, 1);
    REQUIRE(samples.size() == 5);
    for (const StateTransition& rows : samples)
        CHECK(rows[0][0] == doctest::Approx(0.5));
}

TEST_CASE("sampling the coupled segment hits both endpoints") {
    Rmdp m = testutil::coupled_two_state();
    auto samples = sample_uncertainty(m, 0, 10, 2);
    REQUIRE(samples.size() == 10);
    // Endpoint with no slip: both actions stay put.
    CHECK(contains_rows(samples, {{1.0, 0.0}, {1.0, 0.0}}, 1e-9));
    // Endpoint at the cap: the doubled jump reaches probability one.
    CHECK(contains_rows(samples, {{0.5, 0.5}, {0.0, 1.0}}, 1e-9));
    for (const StateTransition& rows : samples) CHECK(transition_in_set(m, 0, rows, 1e-8));
}

TEST_CASE("samples are deterministic per seed and feasible on boxes") {
    std::mt19937_64 rng(5);
    Rmdp m = testutil::random_interval_rmdp(rng, 4, 2);
    auto a = sample_uncertainty(m, 1, 8, 77);
    auto b = sample_uncertainty(m, 1, 8, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t act = 0; act < a[i].size(); ++act)
            CHECK(testutil::max_abs_diff(a[i][act], b[i][act]) == 0.0);
    for (const StateTransition& rows : a) CHECK(transition_in_set(m, 1, rows, 1e-7));
}

TEST_CASE("kernel sampling composes per-state draws") {
    Rmdp m = testutil::coupled_two_state();
    auto kernels = sample_kernels(m, 6, 3);
    REQUIRE(kernels.size() == 6);
    for (const TransitionKernel& P : kernels) {
        CHECK(transition_in_set(m, 0, P[0], 1e-8));
        CHECK(transition_in_set(m, 1, P[1], 1e-8));
    }
}

TEST_CASE("product vertices of the coupled example") {
    Rmdp m = testutil::coupled_two_state();
    auto prod = product_vertex_kernels(m);
    REQUIRE(prod.has_value());
    // Two vertices at state 0 (slip 0 or cap), one at the fixed state 1.
    CHECK(prod->size() == 2);
    CHECK(contains_rows({(*prod)[0][0], (*prod)[1][0]}, {{1.0, 0.0}, {1.0, 0.0}}, 1e-9));
    CHECK(contains_rows({(*prod)[0][0], (*prod)[1][0]}, {{0.5, 0.5}, {0.0, 1.0}}, 1e-9));
}

TEST_CASE("equal policies are classified Equal with no witnesses") {
    Rmdp m = testutil::coupled_two_state();
    Policy pi = deterministic_policy(m, {1, 0});
    auto samples = sample_kernels(m, 30, 9);
    DominanceVerdict v = dominance_check(m, pi, pi, samples);
    CHECK(v.relation == DominanceRelation::Equal);
    CHECK_FALSE(v.witness_better.has_value());
    CHECK_FALSE(v.witness_worse.has_value());
}

TEST_CASE("the doubled jump strictly dominates the single jump") {
    Rmdp m = testutil::coupled_two_state();
    Policy faster = deterministic_policy(m, {1, 0});
    Policy slower = deterministic_policy(m, {0, 0});
    auto samples = sample_kernels(m, 40, 11);
    DominanceVerdict v = dominance_check(m, faster, slower, samples);
    CHECK(v.relation == DominanceRelation::StrictlyDominates);
    REQUIRE(v.witness_better.has_value());
    CHECK(v.best_gap > 0.1);
    // The witness really separates the policies.
    Real rho_fast = evaluate_policy_exact(m, faster, *v.witness_better);
    Real rho_slow = evaluate_policy_exact(m, slower, *v.witness_better);
    CHECK(rho_fast - rho_slow == doctest::Approx(v.best_gap).epsilon(1e-9));

    // Antisymmetry: swapping the arguments flips the verdict.
    DominanceVerdict w = dominance_check(m, slower, faster, samples);
    CHECK(w.relation == DominanceRelation::StrictlyDominated);
    CHECK(w.witness_worse.has_value());
}

TEST_CASE("policies winning at different corners are incomparable") {
    // One decision state: action 0 reaches a worthless or a rich sink with a
    // free probability, action 1 splits evenly between them.  The free
    // action wins at one corner and loses at the other.
    Rmdp m;
    m.num_states = 3;
    m.num_actions = 2;
    m.gamma = 0.9;
    m.sense = Sense::Maximize;
    m.initial = {1.0, 0.0, 0.0};
    m.rewards = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
    m.enabled = {{1, 1}, {1, 0}, {1, 0}};
    UncertaintySet u0;
    u0.kind = UncertaintySet::Kind::Interval;
    u0.interval.lower = {{0.0, 0.0, 0.0}, {0.0, 0.5, 0.5}};
    u0.interval.upper = {{0.0, 1.0, 1.0}, {0.0, 0.5, 0.5}};
    UncertaintySet u1;
    u1.kind = UncertaintySet::Kind::Interval;
    u1.interval.lower = {{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}};
    u1.interval.upper = {{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}};
    UncertaintySet u2;
    u2.kind = UncertaintySet::Kind::Interval;
    u2.interval.lower = {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
    u2.interval.upper = {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
    m.uncertainty = {u0, u1, u2};
    validate_model(m);

    Policy free_arm = deterministic_policy(m, {0, 0, 0});
    Policy fixed_arm = deterministic_policy(m, {1, 0, 0});
    auto samples = sample_kernels(m, 50, 13);
    DominanceVerdict v = dominance_check(m, free_arm, fixed_arm, samples);
    CHECK(v.relation == DominanceRelation::Incomparable);
    CHECK(v.witness_better.has_value());
    CHECK(v.witness_worse.has_value());
    CHECK(v.best_gap > 1e-3);
    CHECK(v.worst_gap < -1e-3);
}

TEST_CASE("minimize-sense orientation flips who counts as better") {
    Rmdp m = testutil::coupled_two_state();
    m.sense = Sense::Minimize;
    validate_model(m);
    Policy faster = deterministic_policy(m, {1, 0});
    Policy slower = deterministic_policy(m, {0, 0});
    auto samples = sample_kernels(m, 40, 11);
    // Returns are costs now: the doubled jump collects more cost, so it is
    // strictly dominated.
    DominanceVerdict v = dominance_check(m, faster, slower, samples);
    CHECK(v.relation == DominanceRelation::StrictlyDominated);
}

TEST_CASE("deterministic-policy enumeration counts and caps") {
    Rmdp m2 = testutil::coupled_two_state();
    auto two = enumerate_deterministic_policies(m2, 100);
    CHECK(two.size() == 2);

    std::mt19937_64 rng(15);
    Rmdp m27 = testutil::random_interval_rmdp(rng, 3, 3);
    auto all = enumerate_deterministic_policies(m27, 100);
    CHECK(all.size() == 27);
    // Every pair differs somewhere.
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            bool differ = false;
            for (std::size_t s = 0; s < all[i].size() && !differ; ++s)
                differ = testutil::max_abs_diff(all[i][s], all[j][s]) > 0.5;
            CHECK(differ);
        }

    bool threw = false;
    try {
        enumerate_deterministic_policies(m27, 10);
    } catch (const ValidationError& e) {
        threw = true;
        CHECK(std::string(e.what()) == "policy space 27 exceeds cap");
    }
    CHECK(threw);
}

TEST_CASE("classical value iteration solves a known chain") {
    Rmdp m = testutil::coupled_two_state_pinned();
    ClassicalViResult r = classical_value_iteration(m, nominal_kernel(m));
    REQUIRE(r.converged);
    // The doubled jump is optimal: value 6.2069 at state 0.
    CHECK(r.value[0] == doctest::Approx(6.206896551724138).epsilon(1e-8));
    CHECK(r.value[1] == doctest::Approx(6.896551724137931).epsilon(1e-8));
    CHECK(testutil::chosen_action(r.policy[0]) == 1);
    // The greedy policy's exact evaluation reproduces the fixed point.
    Vec value;
    evaluate_policy_exact(m, r.policy, nominal_kernel(m), &value);
    CHECK(testutil::max_abs_diff(value, r.value) < 1e-8);
}

TEST_CASE("classical value iteration respects the minimize sense") {
    Rmdp m = testutil::coupled_two_state_pinned();
    m.sense = Sense::Minimize;
    validate_model(m);
    ClassicalViResult r = classical_value_iteration(m, nominal_kernel(m));
    REQUIRE(r.converged);
    // Costs: the single jump keeps the total down.
    CHECK(r.value[0] == doctest::Approx(4.5).epsilon(1e-8));
    CHECK(testutil::chosen_action(r.policy[0]) == 0);
}

TEST_CASE("finite differences agree with a hand derivative") {
    // For the pinned chain, Z(jump q) = 0.9 q u / (1 - 0.9 (1 - q) - 0.9 q h)
    // with u = 1/0.55, h = 0.45/0.55; differentiate by hand at q = 1/2 along
    // the direction that trades stay mass for jump mass.
    Rmdp m = testutil::coupled_two_state_pinned();
    TransitionKernel P = nominal_kernel(m);
    Policy pi = deterministic_policy(m, {0, 0});
    Direction v = {{-1.0, 1.0}, {0.0, 0.0}};
    const Real fd = fd_directional_derivative(m, pi, P, 0, v);
    const Real u = 1.0 / 0.55, h = 0.45 / 0.55;
    const Real q = 0.5;
    const Real N = 0.9 * q * u;
    const Real D = 1.0 - 0.9 * (1.0 - q) - 0.9 * q * h;
    const Real dN = 0.9 * u;
    const Real dDen = 0.9 * (1.0 - h);
    const Real hand = (dN * D - N * dDen) / (D * D);
    CHECK(fd == doctest::Approx(hand).epsilon(1e-6));
}

TEST_CASE("relation names cover the scale") {
    CHECK(std::string(dominance_relation_name(DominanceRelation::Equal)) == "equal");
    CHECK(std::string(dominance_relation_name(DominanceRelation::StrictlyDominates)) ==
          "strictly_dominates");
    CHECK(std::string(dominance_relation_name(DominanceRelation::Incomparable)) ==
          "incomparable");
}
