#include "orbe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <system_error>
#include <thread>
#include <utility>

#include "orbe/rational.hpp"
#include "orbe/refine.hpp"

namespace orbe {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

/// Per-action representative interior rows of one state's uncertainty set
/// (interval centers, or the cached relative-interior point of a polytope).
StateTransition center_rows(const Rmdp& m, int state) {
    const std::size_t A = static_cast<std::size_t>(m.num_actions);
    const std::size_t S = static_cast<std::size_t>(m.num_states);
    StateTransition center(A, Vec(S, 0.0));
    const UncertaintySet& u = m.uncertainty[static_cast<std::size_t>(state)];
    if (u.kind == UncertaintySet::Kind::Polytope) {
        if (u.polytope.interior.feasible)
            u.polytope.unpack(u.polytope.interior.point, center, m.num_actions, m.num_states);
    } else {
        for (std::size_t a = 0; a < A; ++a) {
            if (!m.is_enabled(state, static_cast<int>(a))) continue;
            center[a] = interval_center(u.interval.lower[a], u.interval.upper[a]);
        }
    }
    return center;
}

/**
 * Path (c): prune the robust-optimal candidates by the value derivative,
 * each candidate anchored at its own worst-case point and differentiated
 * toward the set's interior, with the plain-RVI policy as reference.  One
 * batched first-return factorization serves every state; no further value
 * iteration runs.
 */
std::vector<int> derivative_pruned_choice(const Rmdp& m, const RobustSolution& sol,
                                          const CandidateSet& cands, Real deriv_tol) {
    const std::size_t S = static_cast<std::size_t>(m.num_states);
    const std::size_t A = static_cast<std::size_t>(m.num_actions);
    const bool keep_max = m.sense == Sense::Maximize;  // anchored at the worst case
    const std::vector<FirstReturn> frs = first_return_all(m, sol.policy, sol.worst_transition);

    std::vector<int> choice(S, 0);
    Vec pi_s(A, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        if (cands[s].size() == 1) {
            choice[s] = cands[s].front();
            continue;
        }
        const StateTransition center = center_rows(m, static_cast<int>(s));
        int best_a = cands[s].front();
        Real extremal = 0.0;
        bool have = false;
        for (int a : cands[s]) {
            const auto au = static_cast<std::size_t>(a);
            // The candidate's own worst-case anchor: the adversary optimized
            // against this action alone, so its row is uniquely pinned.
            std::fill(pi_s.begin(), pi_s.end(), 0.0);
            pi_s[au] = 1.0;
            const StateTransition anchor =
                inner_optimize_state(m, static_cast<int>(s), pi_s, sol.value, sol.adversary)
                    .first;
            Direction v(A, Vec(static_cast<std::size_t>(m.num_states), 0.0));
            Real vmax = 0.0;
            for (std::size_t t = 0; t < v[au].size(); ++t) {
                v[au][t] = center[au][t] - anchor[au][t];
                vmax = std::max(vmax, std::abs(v[au][t]));
            }
            // A pinned row has nowhere to move; its value is flat (d = 0).
            Real d = 0.0;
            if (vmax > 1e-14) {
                const RationalValueForm f = form_for_action(m, static_cast<int>(s), a, frs[s]);
                d = directional_derivative(f, anchor, v);
            }
            const bool better = !have || (keep_max ? d > extremal + deriv_tol * (1.0 + std::abs(extremal))
                                                   : d < extremal - deriv_tol * (1.0 + std::abs(extremal)));
            if (better) {
                extremal = d;
                best_a = a;
                have = true;
            }
        }
        choice[s] = best_a;
    }
    return choice;
}

BenchResultRow run_cell(const BenchConfig& cfg, int size, double nu, std::uint64_t seed) {
    BenchResultRow row;
    row.size = size;
    row.nu = nu;
    row.seed = static_cast<long long>(seed);
    try {
        GridworldConfig gw;
        gw.width = bench_grid_width(size);
        gw.height = size / gw.width;
        const long long cells = static_cast<long long>(size);
        long long obst = std::llround(cfg.obstacle_fraction * static_cast<double>(size));
        obst = std::clamp<long long>(obst, 0, cells - 2);
        gw.obstacles = static_cast<int>(obst);
        gw.nu = nu;
        gw.p = cfg.p;
        gw.q_max = cfg.q_max;
        gw.seed = seed;
        gw.variant = cfg.variant;
        gw.gamma = cfg.gamma;
        const Rmdp m = gen_gridworld(gw);

        const Real cand_tol = cfg.candidate_tolerance < 0.0 ? 10.0 * cfg.solver.epsilon
                                                            : cfg.candidate_tolerance;

        // Path (a): plain robust value iteration.
        auto t0 = clock_type::now();
        const RobustSolution sol = robust_value_iteration(m, cfg.solver);
        row.time_rvi_s = seconds_since(t0);
        if (!sol.converged)
            throw ConvergenceError("robust value iteration did not converge within its budget");
        row.be_rvi_pct = be_action_fraction(m, sol.policy);

        // Path (b): best-case re-solve over the robust-optimal actions.
        t0 = clock_type::now();
        CandidateSet cands = optimal_action_set(m, sol, cand_tol);
        const Adversary best_dir =
            sol.adversary == Adversary::Min ? Adversary::Max : Adversary::Min;
        const RobustSolution sol_best = robust_value_iteration(
            m, cfg.solver, best_dir, &cands, &sol.value, &sol.worst_transition);
        if (!sol_best.converged)
            throw ConvergenceError("best-case value iteration did not converge within its budget");
        row.time_bestcase_s = row.time_rvi_s + seconds_since(t0);
        row.be_bestcase_pct = be_action_fraction(m, sol_best.policy);

        // Path (c): derivative pruning at the worst-case anchor.
        t0 = clock_type::now();
        CandidateSet cands2 = optimal_action_set(m, sol, cand_tol);
        const std::vector<int> pruned = derivative_pruned_choice(m, sol, cands2, 1e-7);
        const Policy pi_deriv = deterministic_policy(m, pruned);
        row.time_deriv_s = row.time_rvi_s + seconds_since(t0);
        row.be_deriv_pct = be_action_fraction(m, pi_deriv);
    } catch (const std::exception& e) {
        row.error = e.what();
        if (row.error.empty()) row.error = "unknown failure";
    }
    return row;
}

std::string sanitize_error(std::string text) {
    for (char& c : text) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

void append_number(std::string& out, double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, res.ptr);
}

double parse_double(const std::string& field, const char* what) {
    double x = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc() || res.ptr != last)
        throw ValidationError(std::string("bad numeric CSV field for ") + what + ": '" + field + "'");
    return x;
}

long long parse_int(const std::string& field, const char* what) {
    long long x = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc() || res.ptr != last)
        throw ValidationError(std::string("bad integer CSV field for ") + what + ": '" + field + "'");
    return x;
}

constexpr const char* kHeaderCore =
    "size,nu,seed,time_rvi_s,be_rvi_pct,time_bestcase_s,be_bestcase_pct,time_deriv_s,be_deriv_pct";

}  // namespace

int bench_grid_width(int size) {
    if (size < 2) throw ValidationError("bench sizes must be at least 2");
    int w = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(size))));
    while (size % w != 0) ++w;
    return w;
}

std::vector<BenchResultRow> run_bench(const BenchConfig& cfg) {
    if (cfg.seeds < 1) throw ValidationError("bench needs at least one seed");
    struct Cell {
        int size;
        double nu;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int size : cfg.sizes)
        for (double nu : cfg.nus)
            for (int k = 0; k < cfg.seeds; ++k)
                cells.push_back({size, nu, cfg.seed_base + static_cast<std::uint64_t>(k)});

    std::vector<BenchResultRow> per_cell(cells.size());
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            per_cell[i] = run_cell(cfg, cells[i].size, cells[i].nu, cells[i].seed);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                per_cell[i] = run_cell(cfg, cells[i].size, cells[i].nu, cells[i].seed);
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
        pool.reserve(n);
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Group rows per (size, nu) in configuration order and append means.
    std::vector<BenchResultRow> rows;
    rows.reserve(per_cell.size() + cfg.sizes.size() * cfg.nus.size());
    std::size_t i = 0;
    for (int size : cfg.sizes) {
        for (double nu : cfg.nus) {
            BenchResultRow mean;
            mean.size = size;
            mean.nu = nu;
            mean.seed = -1;
            int ok = 0;
            for (int k = 0; k < cfg.seeds; ++k, ++i) {
                const BenchResultRow& r = per_cell[i];
                rows.push_back(r);
                if (!r.error.empty()) continue;
                ++ok;
                mean.time_rvi_s += r.time_rvi_s;
                mean.be_rvi_pct += r.be_rvi_pct;
                mean.time_bestcase_s += r.time_bestcase_s;
                mean.be_bestcase_pct += r.be_bestcase_pct;
                mean.time_deriv_s += r.time_deriv_s;
                mean.be_deriv_pct += r.be_deriv_pct;
            }
            if (ok > 0) {
                const double d = static_cast<double>(ok);
                mean.time_rvi_s /= d;
                mean.be_rvi_pct /= d;
                mean.time_bestcase_s /= d;
                mean.be_bestcase_pct /= d;
                mean.time_deriv_s /= d;
                mean.be_deriv_pct /= d;
            } else {
                mean.error = "no successful runs";
            }
            rows.push_back(std::move(mean));
        }
    }
    return rows;
}

std::string bench_to_csv(const std::vector<BenchResultRow>& rows) {
    std::string out(kHeaderCore);
    out += ",error\n";
    for (const BenchResultRow& r : rows) {
        out += std::to_string(r.size);
        out += ',';
        append_number(out, r.nu);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        append_number(out, r.time_rvi_s);
        out += ',';
        append_number(out, r.be_rvi_pct);
        out += ',';
        append_number(out, r.time_bestcase_s);
        out += ',';
        append_number(out, r.be_bestcase_pct);
        out += ',';
        append_number(out, r.time_deriv_s);
        out += ',';
        append_number(out, r.be_deriv_pct);
        out += ',';
        out += sanitize_error(r.error);
        out += '\n';
    }
    return out;
}

std::vector<BenchResultRow> bench_from_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(std::move(line));
        pos = nl + 1;
    }
    if (lines.empty()) throw ValidationError("empty CSV");
    const bool with_error = lines[0] == std::string(kHeaderCore) + ",error";
    if (!with_error && lines[0] != kHeaderCore)
        throw ValidationError("unrecognized CSV header: '" + lines[0] + "'");

    std::vector<BenchResultRow> rows;
    rows.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string& line = lines[li];
        std::vector<std::string> fields;
        std::size_t start = 0;
        // Nine numeric fields; anything after the ninth comma is the error text.
        for (int k = 0; k < 9; ++k) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                if (k < 8) throw ValidationError("CSV row with too few fields: '" + line + "'");
                fields.push_back(line.substr(start));
                start = line.size() + 1;
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        BenchResultRow r;
        r.size = static_cast<int>(parse_int(fields[0], "size"));
        r.nu = parse_double(fields[1], "nu");
        r.seed = parse_int(fields[2], "seed");
        r.time_rvi_s = parse_double(fields[3], "time_rvi_s");
        r.be_rvi_pct = parse_double(fields[4], "be_rvi_pct");
        r.time_bestcase_s = parse_double(fields[5], "time_bestcase_s");
        r.be_bestcase_pct = parse_double(fields[6], "be_bestcase_pct");
        r.time_deriv_s = parse_double(fields[7], "time_deriv_s");
        r.be_deriv_pct = parse_double(fields[8], "be_deriv_pct");
        if (start <= line.size()) r.error = line.substr(start);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace orbe
