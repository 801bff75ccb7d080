#pragma once

#include <cstdint>

#include "orbe/model.hpp"

namespace orbe {

/**
 * Slippery-gridworld benchmark generator.
 *
 * The agent starts in the top-left corner and must reach the bottom-right
 * corner of a width x height grid, paying reward 1 per step (sense is
 * minimize; the goal is absorbing with reward 0).  Each of the four movement
 * directions comes as a twin pair of actions: a plain move that slips (stays
 * in place) with probability exactly p, and a best-effort (BE) move whose
 * slip probability is only known to lie in [p - q_max, p].  Which twin is
 * declared first in the action order is drawn per state: with probability nu
 * the BE action precedes its plain twin.
 *
 * Moving off-grid stays in place with probability 1.  Moving into an
 * obstacle cell sends the agent back to the start cell instead.  Obstacle
 * cells themselves are unreachable and modeled as absorbing self-loops.
 *
 * Variants:
 *  - Imdp:  every (state, action) gets an independent interval box, so the
 *           BE actions' slip values can vary per action.
 *  - Srect: each state gets one polytopic set in which all BE actions share
 *           a single improvement q in [0, q_max] (slip = p - q), while plain
 *           moves are pinned to slip exactly p.
 */
enum class GridVariant { Imdp, Srect };

struct GridworldConfig {
    int width = 10;
    int height = 10;
    int obstacles = 10;         ///< number of obstacle cells to place
    double nu = 0.5;            ///< fraction of states declaring the BE twin first
    double p = 0.25;            ///< worst-case slip probability
    double q_max = 0.1;         ///< maximum slip improvement, 0 <= q_max <= p < 1
    std::uint64_t seed = 0;
    GridVariant variant = GridVariant::Imdp;
    double gamma = 0.99;
};

/**
 * Generates a gridworld model.  Obstacle cells are placed uniformly over the
 * non-start, non-goal cells and the layout is rejection-resampled (up to 100
 * times) until every non-obstacle cell is reachable from the start by
 * 4-neighbor moves; in particular the goal is reachable.  Throws
 * ValidationError on invalid configs or when no connected layout is found.
 *
 * Same config and seed always produce a byte-identical model file.  The
 * returned model's `meta` carries `be_actions` ([state][action] booleans),
 * `start`, `goal`, `obstacles`, `width`, `height`, and the generator
 * parameters.
 */
Rmdp gen_gridworld(const GridworldConfig& cfg);

/**
 * Percentage (0..100) of decision states whose policy action carries the
 * generator's best-effort tag.  Decision states are all states except the
 * goal and the obstacle cells listed in `meta`.  For stochastic policy rows
 * the first most-probable action counts.  Throws ValidationError when the
 * model has no generator metadata with BE tags.
 */
double be_action_fraction(const Rmdp& m, const Policy& pi);

}  // namespace orbe
