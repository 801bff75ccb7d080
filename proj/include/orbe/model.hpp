// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#pragma once

#include "orbe/geometry.hpp"
#include "orbe/lp.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace orbe {

/// Model data or file contents violate the format contract.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An iterative procedure exhausted its iteration budget without converging.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A linear solve or related numeric step failed its residual check.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One state's transition rows: [action][successor], row-stochastic for
/// enabled actions (disabled rows are all-zero placeholders).
using StateTransition = Mat;

/// A full transition kernel: one StateTransition per state.
using TransitionKernel = std::vector<StateTransition>;

/// A (possibly randomized) policy: [state][action] probabilities.
using Policy = Mat;

/// Per-(action,successor) probability bounds for one state.
struct IntervalSet {
    Mat lower; ///< [action][successor]
    Mat upper; ///< [action][successor]
};

/**
 * Polytopic uncertainty for one state over the stacked transition vector.
 * `support` names the stacked columns as (action, successor) pairs; the
 * constraint rows of A/Aeq act on those columns.  Probabilities outside the
 * support are structurally zero.  The per-action simplex equalities are not
 * stored here; they are appended when `hull` is built during validation.
 */
struct PolytopeSet {
    std::vector<std::pair<int, int>> support;
    Mat A;
    Vec b;
    Mat Aeq;
    Vec beq;

    // Built by validate(): the full halfspace system including per-action
    // simplex rows, and a cached relative-interior point of it.
    HPolytope hull;
    InteriorPointInfo interior;

    /// Extracts the support entries of dense rows into a stacked vector.
    Vec pack(const StateTransition& rows) const;
    /// Writes a stacked vector back to dense rows (non-support entries 0).
    void unpack(const Vec& x, StateTransition& rows, int num_actions, int num_states) const;
};

struct UncertaintySet {
    enum class Kind { Interval, Polytope };
    Kind kind = Kind::Interval;
    IntervalSet interval;
    PolytopeSet polytope;
};

enum class Sense { Maximize, Minimize };

/**
 * A robust MDP with per-state rectangular uncertainty.  Actions are indexed
 * uniformly across states; `enabled` masks per-state availability.  `meta`
 * carries generator metadata (serialized JSON text) that solvers ignore.
 */
struct Rmdp {
    int num_states = 0;
    int num_actions = 0;
    Real gamma = 0.9;
    Sense sense = Sense::Maximize;
    Vec initial;                            ///< initial distribution, size |S|
    Mat rewards;                            ///< [state][action], nonnegative
    std::vector<std::vector<char>> enabled; ///< [state][action]
    std::vector<UncertaintySet> uncertainty;
    std::string meta_json;                  ///< "" when absent

    bool is_enabled(int s, int a) const { return enabled[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] != 0; }
};

/// Feasible per-coordinate ranges of an interval row intersected with the
/// simplex: lo_i = max(l_i, 1 - sum_{j!=i} u_j), hi_i = min(u_i, 1 - sum_{j!=i} l_j).
struct IntervalRanges {
    Vec lo;
    Vec hi;
    bool feasible = false;
};
IntervalRanges interval_ranges(const Vec& lower, const Vec& upper);

/// A feasible distribution for an interval row: l + theta (u - l) with theta
/// chosen so the entries sum to one.  Relative-interior whenever one exists.
Vec interval_center(const Vec& lower, const Vec& upper);

/// Loads, parses and validates a model file.  Throws ValidationError.
Rmdp load_model(const std::string& path);

/// Parses and validates a model from JSON text.  Throws ValidationError.
Rmdp model_from_json_text(const std::string& text);

/// Serializes the model back to JSON text (round-trips through the loader).
std::string model_to_json_text(const Rmdp& m, int indent = 2);

/// Writes the model to a file.
void save_model(const Rmdp& m, const std::string& path);

/**
 * Checks all structural invariants and certifies every uncertainty set
 * nonempty; caches each polytope's hull and relative-interior point.
 * Throws ValidationError with a state-identifying message on failure.
 */
void validate_model(Rmdp& m);

/// Converts one state's interval uncertainty to an equivalent polytope over
/// all enabled (action, successor) columns.  The result still needs
/// validate_model (or finalize) to build its hull.
UncertaintySet interval_to_polytope(const IntervalSet& iv,
                                    const std::vector<char>& enabled_row);

/// Builds hull+interior for one polytope set (per-action simplex rows added
/// from the support).  Used by validate_model and by tests that hand-build sets.
void finalize_polytope(PolytopeSet& ps, const std::vector<char>& enabled_row,
                       int num_states);

/// One state's uncertainty set as a finalized polytope: interval sets are
/// converted and finalized on the fly, polytope sets are returned as stored
/// (hull and interior included).
PolytopeSet state_as_polytope(const Rmdp& m, int state);

/// A transition kernel with every uncertainty set at its cached interior
/// (intervals at their center); disabled actions get zero rows.
TransitionKernel nominal_kernel(const Rmdp& m);

/// P^pi as a dense |S| x |S| matrix for the given kernel and policy.
Mat policy_transition_matrix(const Rmdp& m, const Policy& pi, const TransitionKernel& P);

/// R^pi, size |S|.
Vec policy_reward(const Rmdp& m, const Policy& pi);

/**
 * Exact policy evaluation: solves (I - gamma P^pi) V = R^pi by LU with a
 * residual check (NumericError beyond 1e-9 relative).  Returns the expected
 * return under the initial distribution; writes V through value_out if given.
 */
Real evaluate_policy_exact(const Rmdp& m, const Policy& pi, const TransitionKernel& P,
                           Vec* value_out = nullptr);

/// One-hot policy from per-state action indices.
Policy deterministic_policy(const Rmdp& m, const std::vector<int>& actions);

/// Membership test of dense transition rows in a state's uncertainty set.
bool transition_in_set(const Rmdp& m, int state, const StateTransition& rows, Real tol = 1e-10);

} // namespace orbe
