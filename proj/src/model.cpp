// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/model.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace orbe {

using nlohmann::json;

namespace {

std::string state_msg(const char* what, int state) {
    std::ostringstream os;
    os << what << " at state " << state;
    return os.str();
}

} // namespace

// ---------------------------------------------------------------------------
// Interval helpers
// ---------------------------------------------------------------------------

IntervalRanges interval_ranges(const Vec& lower, const Vec& upper) {
    const std::size_t n = lower.size();
    IntervalRanges r;
    r.lo.resize(n);
    r.hi.resize(n);
    Real sum_l = 0.0, sum_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_l += lower[i];
        sum_u += upper[i];
    }
    r.feasible = sum_l <= 1.0 + 1e-9 && sum_u >= 1.0 - 1e-9;
    for (std::size_t i = 0; i < n; ++i) {
        r.lo[i] = std::max(lower[i], 1.0 - (sum_u - upper[i]));
        r.hi[i] = std::min(upper[i], 1.0 - (sum_l - lower[i]));
        if (r.lo[i] > r.hi[i] + 1e-12) r.feasible = false;
    }
    return r;
}

Vec interval_center(const Vec& lower, const Vec& upper) {
    const std::size_t n = lower.size();
    Real sum_l = 0.0, sum_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_l += lower[i];
        sum_u += upper[i];
    }
    Vec x(n);
    const Real span = sum_u - sum_l;
    const Real theta = span > 1e-15 ? (1.0 - sum_l) / span : 0.0;
    for (std::size_t i = 0; i < n; ++i)
        x[i] = lower[i] + theta * (upper[i] - lower[i]);
    return x;
}

// ---------------------------------------------------------------------------
// PolytopeSet packing
// ---------------------------------------------------------------------------

Vec PolytopeSet::pack(const StateTransition& rows) const {
    Vec x(support.size());
    for (std::size_t k = 0; k < support.size(); ++k)
        x[k] = rows[static_cast<std::size_t>(support[k].first)]
                   [static_cast<std::size_t>(support[k].second)];
    return x;
}

void PolytopeSet::unpack(const Vec& x, StateTransition& rows, int num_actions,
                         int num_states) const {
    rows.assign(static_cast<std::size_t>(num_actions),
                Vec(static_cast<std::size_t>(num_states), 0.0));
    for (std::size_t k = 0; k < support.size(); ++k)
        rows[static_cast<std::size_t>(support[k].first)]
            [static_cast<std::size_t>(support[k].second)] = x[k];
}

void finalize_polytope(PolytopeSet& ps, const std::vector<char>& enabled_row,
                       int num_states) {
    (void)num_states;
    ps.hull.dim = ps.support.size();
    ps.hull.A = ps.A;
    ps.hull.b = ps.b;
    ps.hull.Aeq = ps.Aeq;
    ps.hull.beq = ps.beq;
    for (std::size_t a = 0; a < enabled_row.size(); ++a) {
        if (!enabled_row[a]) continue;
        Vec row(ps.support.size(), 0.0);
        for (std::size_t k = 0; k < ps.support.size(); ++k)
            if (ps.support[k].first == static_cast<int>(a)) row[k] = 1.0;
        ps.hull.Aeq.push_back(std::move(row));
        ps.hull.beq.push_back(1.0);
    }
    ps.interior = find_relative_interior(ps.hull);
}

PolytopeSet state_as_polytope(const Rmdp& m, int state) {
    const auto s = static_cast<std::size_t>(state);
    const UncertaintySet& u = m.uncertainty[s];
    if (u.kind == UncertaintySet::Kind::Polytope) return u.polytope;
    UncertaintySet conv = interval_to_polytope(u.interval, m.enabled[s]);
    finalize_polytope(conv.polytope, m.enabled[s], m.num_states);
    return conv.polytope;
}

UncertaintySet interval_to_polytope(const IntervalSet& iv,
                                    const std::vector<char>& enabled_row) {
    UncertaintySet u;
    u.kind = UncertaintySet::Kind::Polytope;
    PolytopeSet& ps = u.polytope;
    const std::size_t num_states = iv.lower.empty() ? 0 : iv.lower[0].size();
    for (std::size_t a = 0; a < iv.lower.size(); ++a) {
        if (!enabled_row[a]) continue;
        for (std::size_t s = 0; s < num_states; ++s)
            ps.support.emplace_back(static_cast<int>(a), static_cast<int>(s));
    }
    for (std::size_t k = 0; k < ps.support.size(); ++k) {
        const auto a = static_cast<std::size_t>(ps.support[k].first);
        const auto s = static_cast<std::size_t>(ps.support[k].second);
        const Real lo = iv.lower[a][s];
        const Real hi = iv.upper[a][s];
        if (std::abs(hi - lo) <= 1e-15) {
            Vec row(ps.support.size(), 0.0);
            row[k] = 1.0;
            ps.Aeq.push_back(std::move(row));
            ps.beq.push_back(lo);
            continue;
        }
        if (hi < 1.0) {
            Vec row(ps.support.size(), 0.0);
            row[k] = 1.0;
            ps.A.push_back(std::move(row));
            ps.b.push_back(hi);
        }
        if (lo > 0.0) {
            Vec row(ps.support.size(), 0.0);
            row[k] = -1.0;
            ps.A.push_back(std::move(row));
            ps.b.push_back(-lo);
        }
    }
    return u;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void validate_model(Rmdp& m) {
    if (m.num_states < 1 || m.num_actions < 1)
        throw ValidationError("model needs at least one state and one action");
    if (!(m.gamma > 0.0 && m.gamma < 1.0))
        throw ValidationError("discount must lie strictly between 0 and 1");
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    if (m.initial.size() != S)
        throw ValidationError("initial distribution size does not match state count");
    Real init_sum = 0.0;
    for (Real p : m.initial) {
        if (p < -1e-15) throw ValidationError("initial distribution has a negative entry");
        init_sum += p;
    }
    if (std::abs(init_sum - 1.0) > 1e-12)
        throw ValidationError("initial distribution does not sum to 1");
    if (m.rewards.size() != S)
        throw ValidationError("rewards shape does not match state count");
    if (m.enabled.size() != S)
        throw ValidationError("enabled mask shape does not match state count");
    if (m.uncertainty.size() != S)
        throw ValidationError("uncertainty list size does not match state count");

    for (std::size_t s = 0; s < S; ++s) {
        if (m.rewards[s].size() != A)
            throw ValidationError(state_msg("rewards row has wrong action count", static_cast<int>(s)));
        for (Real r : m.rewards[s])
            if (r < 0.0)
                throw ValidationError(state_msg("negative reward", static_cast<int>(s)));
        if (m.enabled[s].size() != A)
            throw ValidationError(state_msg("enabled row has wrong action count", static_cast<int>(s)));
        bool any = false;
        for (char e : m.enabled[s]) any = any || e != 0;
        if (!any)
            throw ValidationError(state_msg("no enabled action", static_cast<int>(s)));

        UncertaintySet& u = m.uncertainty[s];
        if (u.kind == UncertaintySet::Kind::Interval) {
            IntervalSet& iv = u.interval;
            if (iv.lower.size() != A || iv.upper.size() != A)
                throw ValidationError(state_msg("interval bounds have wrong action count", static_cast<int>(s)));
            for (std::size_t a = 0; a < A; ++a) {
                if (iv.lower[a].size() != S || iv.upper[a].size() != S)
                    throw ValidationError(state_msg("interval bounds have wrong successor count", static_cast<int>(s)));
                if (!m.enabled[s][a]) continue;
                for (std::size_t t = 0; t < S; ++t) {
                    if (iv.lower[a][t] < -1e-15 || iv.upper[a][t] > 1.0 + 1e-12 ||
                        iv.lower[a][t] > iv.upper[a][t] + 1e-12)
                        throw ValidationError(state_msg("interval bounds out of order", static_cast<int>(s)));
                }
                IntervalRanges r = interval_ranges(iv.lower[a], iv.upper[a]);
                if (!r.feasible)
                    throw ValidationError(state_msg("infeasible uncertainty set", static_cast<int>(s)));
                // Certify with an explicit feasible point.
                Vec c = interval_center(iv.lower[a], iv.upper[a]);
                Real sum = 0.0;
                for (Real v : c) sum += v;
                if (std::abs(sum - 1.0) > 1e-9)
                    throw ValidationError(state_msg("infeasible uncertainty set", static_cast<int>(s)));
            }
        } else {
            PolytopeSet& ps = u.polytope;
            std::vector<char> seen(A * S, 0);
            for (auto [a, t] : ps.support) {
                if (a < 0 || a >= m.num_actions || t < 0 || t >= m.num_states)
                    throw ValidationError(state_msg("support entry out of range", static_cast<int>(s)));
                if (!m.enabled[s][static_cast<std::size_t>(a)])
                    throw ValidationError(state_msg("support references disabled action", static_cast<int>(s)));
                char& flag = seen[static_cast<std::size_t>(a) * S + static_cast<std::size_t>(t)];
                if (flag)
                    throw ValidationError(state_msg("duplicate support entry", static_cast<int>(s)));
                flag = 1;
            }
            for (std::size_t a = 0; a < A; ++a) {
                if (!m.enabled[s][a]) continue;
                bool has = false;
                for (auto [pa, pt] : ps.support) has = has || pa == static_cast<int>(a);
                if (!has)
                    throw ValidationError(state_msg("enabled action has empty support", static_cast<int>(s)));
            }
            if (ps.A.size() != ps.b.size() || ps.Aeq.size() != ps.beq.size())
                throw ValidationError(state_msg("constraint row/rhs mismatch", static_cast<int>(s)));
            for (const Vec& row : ps.A)
                if (row.size() != ps.support.size())
                    throw ValidationError(state_msg("constraint row has wrong width", static_cast<int>(s)));
            for (const Vec& row : ps.Aeq)
                if (row.size() != ps.support.size())
                    throw ValidationError(state_msg("constraint row has wrong width", static_cast<int>(s)));
            finalize_polytope(ps, m.enabled[s], m.num_states);
            if (!ps.interior.feasible)
                throw ValidationError(state_msg("infeasible uncertainty set", static_cast<int>(s)));
        }
    }
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

namespace {

Mat parse_matrix(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of arrays");
    Mat out;
    for (const auto& row : j) {
        if (!row.is_array()) throw ValidationError(std::string(what) + " must be an array of arrays");
        Vec r;
        for (const auto& v : row) r.push_back(v.get<Real>());
        out.push_back(std::move(r));
    }
    return out;
}

Vec parse_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
    Vec out;
    for (const auto& v : j) out.push_back(v.get<Real>());
    return out;
}

/// Folds exact +/- inequality-row pairs into equality rows; such pairs are
/// how equalities appear in files that only carry an A/b block.
void promote_equality_pairs(PolytopeSet& ps) {
    const std::size_t m = ps.A.size();
    std::vector<char> used(m, 0);
    Mat keep_A;
    Vec keep_b;
    for (std::size_t i = 0; i < m; ++i) {
        if (used[i]) continue;
        bool promoted = false;
        for (std::size_t j = i + 1; j < m && !promoted; ++j) {
            if (used[j]) continue;
            if (std::abs(ps.b[i] + ps.b[j]) > 1e-14) continue;
            bool neg = true;
            for (std::size_t k = 0; k < ps.A[i].size() && neg; ++k)
                neg = std::abs(ps.A[i][k] + ps.A[j][k]) <= 1e-14;
            if (neg) {
                ps.Aeq.push_back(ps.A[i]);
                ps.beq.push_back(ps.b[i]);
                used[i] = used[j] = 1;
                promoted = true;
            }
        }
        if (!promoted) {
            keep_A.push_back(ps.A[i]);
            keep_b.push_back(ps.b[i]);
            used[i] = 1;
        }
    }
    ps.A = std::move(keep_A);
    ps.b = std::move(keep_b);
}

UncertaintySet parse_uncertainty(const json& ju, int state, int num_states, int num_actions,
                                 const std::vector<char>& enabled_row) {
    UncertaintySet u;
    const std::string type = ju.at("type").get<std::string>();
    if (type == "interval") {
        u.kind = UncertaintySet::Kind::Interval;
        u.interval.lower = parse_matrix(ju.at("lower"), "interval lower");
        u.interval.upper = parse_matrix(ju.at("upper"), "interval upper");
        return u;
    }
    if (type != "polytope")
        throw ValidationError(state_msg("unknown uncertainty type", state));

    u.kind = UncertaintySet::Kind::Polytope;
    PolytopeSet& ps = u.polytope;
    Mat A = ju.contains("A") ? parse_matrix(ju.at("A"), "polytope A") : Mat{};
    Vec b = ju.contains("b") ? parse_vector(ju.at("b"), "polytope b") : Vec{};
    Mat Aeq = ju.contains("Aeq") ? parse_matrix(ju.at("Aeq"), "polytope Aeq") : Mat{};
    Vec beq = ju.contains("beq") ? parse_vector(ju.at("beq"), "polytope beq") : Vec{};

    if (ju.contains("support")) {
        for (const auto& entry : ju.at("support")) {
            if (!entry.is_array() || entry.size() != 2)
                throw ValidationError(state_msg("support entries must be [action, successor] pairs", state));
            ps.support.emplace_back(entry[0].get<int>(), entry[1].get<int>());
        }
        ps.A = std::move(A);
        ps.b = std::move(b);
        ps.Aeq = std::move(Aeq);
        ps.beq = std::move(beq);
    } else {
        // Dense layout: columns are the stacked [action][successor] vector
        // over all actions; columns of disabled actions must be untouched.
        const std::size_t dense = static_cast<std::size_t>(num_actions) * static_cast<std::size_t>(num_states);
        std::vector<int> col_of(dense, -1);
        for (int a = 0; a < num_actions; ++a) {
            if (!enabled_row[static_cast<std::size_t>(a)]) continue;
            for (int t = 0; t < num_states; ++t) {
                col_of[static_cast<std::size_t>(a) * static_cast<std::size_t>(num_states) +
                       static_cast<std::size_t>(t)] = static_cast<int>(ps.support.size());
                ps.support.emplace_back(a, t);
            }
        }
        auto compact = [&](const Mat& rows, const char* what) {
            Mat out;
            for (const Vec& row : rows) {
                if (row.size() != dense)
                    throw ValidationError(state_msg("polytope row width does not match the stacked vector", state));
                Vec r(ps.support.size(), 0.0);
                for (std::size_t k = 0; k < dense; ++k) {
                    if (col_of[k] >= 0) {
                        r[static_cast<std::size_t>(col_of[k])] = row[k];
                    } else if (std::abs(row[k]) > 1e-15) {
                        throw ValidationError(state_msg((std::string(what) + " references disabled action").c_str(), state));
                    }
                }
                out.push_back(std::move(r));
            }
            return out;
        };
        ps.A = compact(A, "polytope constraint");
        ps.b = std::move(b);
        ps.Aeq = compact(Aeq, "polytope constraint");
        ps.beq = std::move(beq);
    }
    if (ps.A.size() != ps.b.size() || ps.Aeq.size() != ps.beq.size())
        throw ValidationError(state_msg("constraint row/rhs mismatch", state));
    promote_equality_pairs(ps);
    return u;
}

} // namespace

Rmdp model_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("model is not valid JSON: ") + e.what());
    }
    Rmdp m;
    try {
        m.num_states = j.at("states").get<int>();
        m.num_actions = j.at("actions").get<int>();
        m.gamma = j.at("gamma").get<Real>();
        const std::string sense = j.at("sense").get<std::string>();
        if (sense == "max" || sense == "maximize")
            m.sense = Sense::Maximize;
        else if (sense == "min" || sense == "minimize")
            m.sense = Sense::Minimize;
        else
            throw ValidationError("sense must be \"max\" or \"min\"");
        m.initial = parse_vector(j.at("initial"), "initial");
        m.rewards = parse_matrix(j.at("rewards"), "rewards");

        const auto S = static_cast<std::size_t>(std::max(m.num_states, 0));
        const auto A = static_cast<std::size_t>(std::max(m.num_actions, 0));
        m.enabled.assign(S, std::vector<char>(A, 1));
        if (j.contains("enabled")) {
            const json& je = j.at("enabled");
            if (!je.is_array() || je.size() != S)
                throw ValidationError("enabled mask shape does not match state count");
            for (std::size_t s = 0; s < S; ++s) {
                if (!je[s].is_array() || je[s].size() != A)
                    throw ValidationError("enabled mask shape does not match action count");
                for (std::size_t a = 0; a < A; ++a)
                    m.enabled[s][a] = je[s][a].get<bool>() ? 1 : 0;
            }
        }
        const json& ju = j.at("uncertainty");
        if (!ju.is_array() || ju.size() != S)
            throw ValidationError("uncertainty list size does not match state count");
        for (std::size_t s = 0; s < S; ++s)
            m.uncertainty.push_back(parse_uncertainty(ju[s], static_cast<int>(s), m.num_states,
                                                      m.num_actions, m.enabled[s]));
        if (j.contains("meta")) m.meta_json = j.at("meta").dump();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
    validate_model(m);
    return m;
}

Rmdp load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json_text(buf.str());
}

std::string model_to_json_text(const Rmdp& m, int indent) {
    json j;
    j["states"] = m.num_states;
    j["actions"] = m.num_actions;
    j["gamma"] = m.gamma;
    j["sense"] = m.sense == Sense::Maximize ? "max" : "min";
    j["initial"] = m.initial;
    j["rewards"] = m.rewards;

    bool all_enabled = true;
    for (const auto& row : m.enabled)
        for (char e : row) all_enabled = all_enabled && e != 0;
    if (!all_enabled) {
        json je = json::array();
        for (const auto& row : m.enabled) {
            json r = json::array();
            for (char e : row) r.push_back(e != 0);
            je.push_back(std::move(r));
        }
        j["enabled"] = std::move(je);
    }

    json ju = json::array();
    for (int s = 0; s < m.num_states; ++s) {
        const UncertaintySet& u = m.uncertainty[static_cast<std::size_t>(s)];
        json e;
        if (u.kind == UncertaintySet::Kind::Interval) {
            e["type"] = "interval";
            e["lower"] = u.interval.lower;
            e["upper"] = u.interval.upper;
        } else {
            const PolytopeSet& ps = u.polytope;
            e["type"] = "polytope";
            // Dense spec layout when the support is the full canonical grid;
            // otherwise the compact support extension.
            const std::size_t dense = static_cast<std::size_t>(m.num_actions) *
                                      static_cast<std::size_t>(m.num_states);
            bool canonical = all_enabled && ps.support.size() == dense;
            for (std::size_t k = 0; canonical && k < ps.support.size(); ++k)
                canonical = ps.support[k].first == static_cast<int>(k) / m.num_states &&
                            ps.support[k].second == static_cast<int>(k) % m.num_states;
            if (canonical) {
                Mat A = ps.A;
                Vec b = ps.b;
                // Equalities travel as +/- inequality pairs in the dense layout.
                for (std::size_t i = 0; i < ps.Aeq.size(); ++i) {
                    Vec neg(ps.Aeq[i].size());
                    for (std::size_t k = 0; k < neg.size(); ++k) neg[k] = -ps.Aeq[i][k];
                    A.push_back(ps.Aeq[i]);
                    b.push_back(ps.beq[i]);
                    A.push_back(std::move(neg));
                    b.push_back(-ps.beq[i]);
                }
                e["A"] = A;
                e["b"] = b;
            } else {
                json sup = json::array();
                for (auto [a, t] : ps.support) sup.push_back(json::array({a, t}));
                e["support"] = std::move(sup);
                e["A"] = ps.A;
                e["b"] = ps.b;
                if (!ps.Aeq.empty()) {
                    e["Aeq"] = ps.Aeq;
                    e["beq"] = ps.beq;
                }
            }
        }
        ju.push_back(std::move(e));
    }
    j["uncertainty"] = std::move(ju);
    if (!m.meta_json.empty()) j["meta"] = json::parse(m.meta_json);
    return j.dump(indent) + "\n";
}

void save_model(const Rmdp& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write model file: " + path);
    out << model_to_json_text(m);
}

// ---------------------------------------------------------------------------
// Kernels and policy evaluation
// ---------------------------------------------------------------------------

TransitionKernel nominal_kernel(const Rmdp& m) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    TransitionKernel P(S, StateTransition(A, Vec(S, 0.0)));
    for (std::size_t s = 0; s < S; ++s) {
        const UncertaintySet& u = m.uncertainty[s];
        if (u.kind == UncertaintySet::Kind::Interval) {
            for (std::size_t a = 0; a < A; ++a)
                if (m.enabled[s][a])
                    P[s][a] = interval_center(u.interval.lower[a], u.interval.upper[a]);
        } else {
            u.polytope.unpack(u.polytope.interior.point, P[s], m.num_actions, m.num_states);
        }
    }
    return P;
}

Mat policy_transition_matrix(const Rmdp& m, const Policy& pi, const TransitionKernel& P) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    Mat T(S, Vec(S, 0.0));
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const Real w = pi[s][a];
            if (w == 0.0) continue;
            if (!m.enabled[s][a])
                throw ValidationError(state_msg("policy places probability on a disabled action",
                                                static_cast<int>(s)));
            for (std::size_t t = 0; t < S; ++t) T[s][t] += w * P[s][a][t];
        }
    }
    return T;
}

Vec policy_reward(const Rmdp& m, const Policy& pi) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    Vec r(S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a) r[s] += pi[s][a] * m.rewards[s][a];
    return r;
}

Real evaluate_policy_exact(const Rmdp& m, const Policy& pi, const TransitionKernel& P,
                           Vec* value_out) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const Mat T = policy_transition_matrix(m, pi, P);
    const Vec r = policy_reward(m, pi);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S),
                                                  static_cast<Eigen::Index>(S));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(S));
    for (std::size_t s = 0; s < S; ++s) {
        rhs(static_cast<Eigen::Index>(s)) = r[s];
        for (std::size_t t = 0; t < S; ++t)
            M(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= m.gamma * T[s][t];
    }
    Eigen::VectorXd v = M.partialPivLu().solve(rhs);
    const Real resid = (M * v - rhs).cwiseAbs().maxCoeff();
    Real rscale = 1.0;
    for (Real x : r) rscale = std::max(rscale, std::abs(x));
    if (!(resid <= 1e-9 * rscale))
        throw NumericError("policy evaluation linear solve failed its residual check");

    Real rho = 0.0;
    if (value_out) value_out->resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        const Real vs = v(static_cast<Eigen::Index>(s));
        if (value_out) (*value_out)[s] = vs;
        rho += m.initial[s] * vs;
    }
    return rho;
}

Policy deterministic_policy(const Rmdp& m, const std::vector<int>& actions) {
    const auto S = static_cast<std::size_t>(m.num_states);
    Policy pi(S, Vec(static_cast<std::size_t>(m.num_actions), 0.0));
    for (std::size_t s = 0; s < S; ++s) pi[s][static_cast<std::size_t>(actions[s])] = 1.0;
    return pi;
}

bool transition_in_set(const Rmdp& m, int state, const StateTransition& rows, Real tol) {
    const auto s = static_cast<std::size_t>(state);
    const UncertaintySet& u = m.uncertainty[s];
    const auto A = static_cast<std::size_t>(m.num_actions);
    const auto S = static_cast<std::size_t>(m.num_states);
    if (u.kind == UncertaintySet::Kind::Interval) {
        for (std::size_t a = 0; a < A; ++a) {
            if (!m.enabled[s][a]) continue;
            Real sum = 0.0;
            for (std::size_t t = 0; t < S; ++t) {
                const Real p = rows[a][t];
                if (p < u.interval.lower[a][t] - tol || p > u.interval.upper[a][t] + tol)
                    return false;
                sum += p;
            }
            if (std::abs(sum - 1.0) > tol * 10.0) return false;
        }
        return true;
    }
    const PolytopeSet& ps = u.polytope;
    std::vector<char> in_support(A * S, 0);
    for (auto [a, t] : ps.support)
        in_support[static_cast<std::size_t>(a) * S + static_cast<std::size_t>(t)] = 1;
    for (std::size_t a = 0; a < A; ++a) {
        if (!m.enabled[s][a]) continue;
        for (std::size_t t = 0; t < S; ++t)
            if (!in_support[a * S + t] && std::abs(rows[a][t]) > tol) return false;
    }
    return constraint_violation(ps.hull, ps.pack(rows)) <= tol;
}

} // namespace orbe
