#include "orbe/gridworld.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "orbe/rng.hpp"

namespace orbe {

namespace {

constexpr int kNumDirections = 4;
constexpr int kNumActions = 2 * kNumDirections;  // twin pair per direction

// up, down, left, right as (dx, dy); state = y * width + x.
constexpr int kDx[kNumDirections] = {0, 0, -1, 1};
constexpr int kDy[kNumDirections] = {-1, 1, 0, 0};

void check_config(const GridworldConfig& cfg) {
    if (cfg.width < 1 || cfg.height < 1)
        throw ValidationError("gridworld dimensions must be positive");
    const long long cells = static_cast<long long>(cfg.width) * cfg.height;
    if (cells < 2)
        throw ValidationError("gridworld needs at least 2 cells");
    if (!(cfg.p >= 0.0 && cfg.p < 1.0))
        throw ValidationError("slip probability p must satisfy 0 <= p < 1");
    if (!(cfg.q_max >= 0.0 && cfg.q_max <= cfg.p))
        throw ValidationError("slip improvement q_max must satisfy 0 <= q_max <= p");
    if (!(cfg.nu >= 0.0 && cfg.nu <= 1.0))
        throw ValidationError("nu must lie in [0, 1]");
    if (cfg.obstacles < 0 || cfg.obstacles > cells - 2)
        throw ValidationError("obstacle count must leave the start and goal cells free");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
        throw ValidationError("discount must lie in (0, 1)");
}

/// True when every non-obstacle cell is reachable from start by 4-neighbor
/// moves between non-obstacle cells (this implies the goal is reachable).
bool fully_connected(int width, int height, const std::vector<char>& blocked, int start) {
    const int cells = width * height;
    int free_cells = 0;
    for (int c = 0; c < cells; ++c)
        if (!blocked[c]) ++free_cells;
    std::vector<char> seen(cells, 0);
    std::queue<int> frontier;
    seen[start] = 1;
    frontier.push(start);
    int visited = 1;
    while (!frontier.empty()) {
        const int c = frontier.front();
        frontier.pop();
        const int x = c % width, y = c / width;
        for (int d = 0; d < kNumDirections; ++d) {
            const int nx = x + kDx[d], ny = y + kDy[d];
            if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
            const int n = ny * width + nx;
            if (blocked[n] || seen[n]) continue;
            seen[n] = 1;
            ++visited;
            frontier.push(n);
        }
    }
    return visited == free_cells;
}

/// Draws `count` distinct obstacle cells uniformly from the cells other than
/// start and goal, by a partial Fisher-Yates shuffle.
std::vector<int> draw_obstacles(std::mt19937_64& rng, int cells, int start, int goal, int count) {
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c)
        if (c != start && c != goal) pool.push_back(c);
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + static_cast<std::size_t>(bounded_draw(rng, pool.size() - static_cast<std::size_t>(i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        picked.push_back(pool[static_cast<std::size_t>(i)]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace

Rmdp gen_gridworld(const GridworldConfig& cfg) {
    check_config(cfg);

    const int width = cfg.width, height = cfg.height;
    const int cells = width * height;
    const int start = 0;
    const int goal = cells - 1;

    std::mt19937_64 rng(cfg.seed);

    // Layout: rejection-resample obstacle placements until the free cells
    // form one connected component around the start.
    std::vector<int> obstacle_cells;
    std::vector<char> blocked(static_cast<std::size_t>(cells), 0);
    bool connected = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
        obstacle_cells = draw_obstacles(rng, cells, start, goal, cfg.obstacles);
        std::fill(blocked.begin(), blocked.end(), 0);
        for (int c : obstacle_cells) blocked[static_cast<std::size_t>(c)] = 1;
        if (fully_connected(width, height, blocked, start)) {
            connected = true;
            break;
        }
    }
    if (!connected)
        throw ValidationError("unreachable cells after 100 resamples");

    // Per decision state: does the best-effort twin precede the plain one?
    std::vector<char> be_first(static_cast<std::size_t>(cells), 0);
    for (int s = 0; s < cells; ++s) {
        if (s == goal || blocked[static_cast<std::size_t>(s)]) continue;
        be_first[static_cast<std::size_t>(s)] = coin(rng, cfg.nu) ? 1 : 0;
    }

    Rmdp m;
    m.num_states = cells;
    m.num_actions = kNumActions;
    m.gamma = cfg.gamma;
    m.sense = Sense::Minimize;
    m.initial.assign(static_cast<std::size_t>(cells), 0.0);
    m.initial[static_cast<std::size_t>(start)] = 1.0;
    m.rewards.assign(static_cast<std::size_t>(cells), Vec(kNumActions, 1.0));
    m.rewards[static_cast<std::size_t>(goal)].assign(kNumActions, 0.0);
    m.enabled.assign(static_cast<std::size_t>(cells), std::vector<char>(kNumActions, 1));
    m.uncertainty.resize(static_cast<std::size_t>(cells));

    std::vector<std::vector<char>> be_actions(static_cast<std::size_t>(cells),
                                              std::vector<char>(kNumActions, 0));

    for (int s = 0; s < cells; ++s) {
        UncertaintySet& u = m.uncertainty[static_cast<std::size_t>(s)];
        const bool absorbing = (s == goal) || blocked[static_cast<std::size_t>(s)] != 0;

        // Destination of each direction's successful move: the neighbor,
        // the start cell when the neighbor is an obstacle, or the cell
        // itself on a wall bump.
        int succ[kNumDirections];
        const int x = s % width, y = s / width;
        for (int d = 0; d < kNumDirections; ++d) {
            const int nx = x + kDx[d], ny = y + kDy[d];
            if (nx < 0 || nx >= width || ny < 0 || ny >= height) {
                succ[d] = s;  // wall bump
            } else {
                const int n = ny * width + nx;
                succ[d] = blocked[static_cast<std::size_t>(n)] ? start : n;
            }
        }

        if (!absorbing) {
            for (int d = 0; d < kNumDirections; ++d) {
                const int be_slot = be_first[static_cast<std::size_t>(s)] ? 2 * d : 2 * d + 1;
                be_actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(be_slot)] = 1;
            }
        }

        if (cfg.variant == GridVariant::Imdp) {
            u.kind = UncertaintySet::Kind::Interval;
            u.interval.lower.assign(kNumActions, Vec(static_cast<std::size_t>(cells), 0.0));
            u.interval.upper.assign(kNumActions, Vec(static_cast<std::size_t>(cells), 0.0));
            for (int a = 0; a < kNumActions; ++a) {
                const int d = a / 2;
                Vec& lo = u.interval.lower[static_cast<std::size_t>(a)];
                Vec& hi = u.interval.upper[static_cast<std::size_t>(a)];
                if (absorbing || succ[d] == s) {
                    lo[static_cast<std::size_t>(s)] = 1.0;
                    hi[static_cast<std::size_t>(s)] = 1.0;
                    continue;
                }
                const std::size_t sc = static_cast<std::size_t>(succ[d]);
                if (be_actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
                    // Best-effort: slip (stay) probability in [p - q_max, p].
                    lo[static_cast<std::size_t>(s)] = cfg.p - cfg.q_max;
                    hi[static_cast<std::size_t>(s)] = cfg.p;
                    lo[sc] = 1.0 - cfg.p;
                    hi[sc] = 1.0 - cfg.p + cfg.q_max;
                } else {
                    // Plain move: slip exactly p.
                    lo[static_cast<std::size_t>(s)] = cfg.p;
                    hi[static_cast<std::size_t>(s)] = cfg.p;
                    lo[sc] = 1.0 - cfg.p;
                    hi[sc] = 1.0 - cfg.p;
                }
            }
        } else {
            u.kind = UncertaintySet::Kind::Polytope;
            PolytopeSet& ps = u.polytope;
            // Stacked support: a stay column per action, plus a move column
            // when the destination differs from the cell.
            std::vector<int> stay_col(kNumActions, -1);
            for (int a = 0; a < kNumActions; ++a) {
                const int d = a / 2;
                stay_col[static_cast<std::size_t>(a)] = static_cast<int>(ps.support.size());
                ps.support.emplace_back(a, s);
                if (!absorbing && succ[d] != s)
                    ps.support.emplace_back(a, succ[d]);
            }
            const std::size_t n = ps.support.size();

            // Plain moves pinned to slip p; best-effort moves share one
            // improvement q via equal stay columns plus a bound pair on the
            // first of them.  Single-column actions are pinned to 1 by the
            // per-action simplex equalities appended at hull build.
            int first_be = -1;
            for (int a = 0; a < kNumActions; ++a) {
                const int d = a / 2;
                if (absorbing || succ[d] == s) continue;
                const std::size_t col = static_cast<std::size_t>(stay_col[static_cast<std::size_t>(a)]);
                if (!be_actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]) {
                    Vec row(n, 0.0);
                    row[col] = 1.0;
                    ps.Aeq.push_back(std::move(row));
                    ps.beq.push_back(cfg.p);
                } else if (first_be < 0) {
                    first_be = a;
                } else {
                    Vec row(n, 0.0);
                    row[col] = 1.0;
                    row[static_cast<std::size_t>(stay_col[static_cast<std::size_t>(first_be)])] = -1.0;
                    ps.Aeq.push_back(std::move(row));
                    ps.beq.push_back(0.0);
                }
            }
            if (first_be >= 0) {
                const std::size_t col = static_cast<std::size_t>(stay_col[static_cast<std::size_t>(first_be)]);
                Vec hi_row(n, 0.0), lo_row(n, 0.0);
                hi_row[col] = 1.0;
                lo_row[col] = -1.0;
                ps.A.push_back(std::move(hi_row));
                ps.b.push_back(cfg.p);
                ps.A.push_back(std::move(lo_row));
                ps.b.push_back(-(cfg.p - cfg.q_max));
            }
        }
    }

    nlohmann::json meta;
    meta["width"] = width;
    meta["height"] = height;
    meta["start"] = start;
    meta["goal"] = goal;
    meta["obstacles"] = obstacle_cells;
    {
        nlohmann::json be = nlohmann::json::array();
        for (int s = 0; s < cells; ++s) {
            nlohmann::json row = nlohmann::json::array();
            for (int a = 0; a < kNumActions; ++a)
                row.push_back(be_actions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)] != 0);
            be.push_back(std::move(row));
        }
        meta["be_actions"] = std::move(be);
    }
    meta["nu"] = cfg.nu;
    meta["p"] = cfg.p;
    meta["q_max"] = cfg.q_max;
    meta["seed"] = cfg.seed;
    meta["variant"] = (cfg.variant == GridVariant::Imdp) ? "imdp" : "srect";
    m.meta_json = meta.dump();

    validate_model(m);
    return m;
}

double be_action_fraction(const Rmdp& m, const Policy& pi) {
    if (m.meta_json.empty())
        throw ValidationError("model lacks generator metadata with BE-action tags");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(m.meta_json);
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("model metadata is not valid JSON");
    }
    if (!meta.contains("be_actions") || !meta.contains("goal"))
        throw ValidationError("model lacks generator metadata with BE-action tags");

    const auto& be = meta["be_actions"];
    if (!be.is_array() || static_cast<int>(be.size()) != m.num_states)
        throw ValidationError("BE-action tags do not match the model's state count");
    const int goal = meta["goal"].get<int>();
    std::vector<char> excluded(static_cast<std::size_t>(m.num_states), 0);
    if (goal >= 0 && goal < m.num_states) excluded[static_cast<std::size_t>(goal)] = 1;
    if (meta.contains("obstacles"))
        for (const auto& c : meta["obstacles"]) {
            const int cell = c.get<int>();
            if (cell >= 0 && cell < m.num_states) excluded[static_cast<std::size_t>(cell)] = 1;
        }

    if (static_cast<int>(pi.size()) != m.num_states)
        throw ValidationError("policy shape does not match the model");

    int decision = 0, chose_be = 0;
    for (int s = 0; s < m.num_states; ++s) {
        if (excluded[static_cast<std::size_t>(s)]) continue;
        const Vec& row_pi = pi[static_cast<std::size_t>(s)];
        if (static_cast<int>(row_pi.size()) != m.num_actions)
            throw ValidationError("policy shape does not match the model");
        ++decision;
        std::size_t best = 0;
        for (std::size_t a = 1; a < row_pi.size(); ++a)
            if (row_pi[a] > row_pi[best]) best = a;
        const auto& row = be[static_cast<std::size_t>(s)];
        if (!row.is_array() || static_cast<int>(row.size()) != m.num_actions)
            throw ValidationError("BE-action tags do not match the model's action count");
        if (row[best].get<bool>()) ++chose_be;
    }
    if (decision == 0) return 0.0;
    return 100.0 * static_cast<double>(chose_be) / static_cast<double>(decision);
}

}  // namespace orbe
