#include "orbe_c.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "orbe/bench.hpp"
#include "orbe/gridworld.hpp"
#include "orbe/model.hpp"
#include "orbe/refine.hpp"
#include "orbe/solver.hpp"

using nlohmann::json;

struct orbe_model {
    orbe::Rmdp m;
};

namespace {

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p != nullptr) {
        std::memcpy(p, s.data(), s.size());
        p[s.size()] = '\0';
    }
    return p;
}

int fail(char** err, int code, const std::string& msg) {
    if (err != nullptr) *err = dup_string(msg);
    return code;
}

template <typename F>
int guarded(char** err, F&& body) {
    if (err != nullptr) *err = nullptr;
    try {
        return body();
    } catch (const orbe::ValidationError& e) {
        return fail(err, ORBE_ERR_VALIDATION, e.what());
    } catch (const orbe::ConvergenceError& e) {
        return fail(err, ORBE_ERR_NONCONVERGENCE, e.what());
    } catch (const orbe::NumericError& e) {
        return fail(err, ORBE_ERR_NUMERIC, e.what());
    } catch (const json::exception& e) {
        return fail(err, ORBE_ERR_VALIDATION, e.what());
    } catch (const std::exception& e) {
        return fail(err, ORBE_ERR_NUMERIC, e.what());
    }
}

json parse_options(const char* text) {
    if (text == nullptr || *text == '\0') return json::object();
    const json j = json::parse(text);
    if (!j.is_object()) throw orbe::ValidationError("options must be a JSON object");
    return j;
}

double dot(const orbe::Vec& a, const orbe::Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

orbe::SolverConfig solver_config_from(const json& opts) {
    orbe::SolverConfig cfg;
    if (opts.contains("epsilon")) cfg.epsilon = opts["epsilon"].get<double>();
    if (opts.contains("max_iterations")) cfg.max_iterations = opts["max_iterations"].get<int>();
    return cfg;
}

orbe::Policy policy_from_json_text(const orbe::Rmdp& m, const char* text) {
    if (text == nullptr) throw orbe::ValidationError("policy JSON is missing");
    const json j = json::parse(text);
    if (!j.is_object() || !j.contains("policy"))
        throw orbe::ValidationError("policy JSON must be an object with a \"policy\" key");
    orbe::Policy pi = j["policy"].get<orbe::Policy>();
    if (static_cast<int>(pi.size()) != m.num_states)
        throw orbe::ValidationError("policy state count does not match the model");
    for (const orbe::Vec& row : pi)
        if (static_cast<int>(row.size()) != m.num_actions)
            throw orbe::ValidationError("policy action count does not match the model");
    return pi;
}

std::vector<int> deterministic_actions(const orbe::Rmdp& m, const orbe::Policy& pi) {
    std::vector<int> actions(pi.size(), 0);
    for (std::size_t s = 0; s < pi.size(); ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < pi[s].size(); ++a)
            if (pi[s][a] > pi[s][best]) best = a;
        if (!(pi[s][best] > 1.0 - 1e-9))
            throw orbe::ValidationError("evaluation requires a deterministic policy");
        if (!m.is_enabled(static_cast<int>(s), static_cast<int>(best)))
            throw orbe::ValidationError("policy selects a disabled action");
        actions[s] = static_cast<int>(best);
    }
    return actions;
}

}  // namespace

extern "C" {

const char* orbe_version(void) { return "0.1.0"; }

void orbe_string_free(char* s) { std::free(s); }

void orbe_model_free(orbe_model* m) { delete m; }

int orbe_model_load(const char* path, orbe_model** out, char** err) {
    if (path == nullptr || out == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded(err, [&] {
        auto handle = new orbe_model{orbe::load_model(path)};
        *out = handle;
        return ORBE_OK;
    });
}

int orbe_model_from_json(const char* text, orbe_model** out, char** err) {
    if (text == nullptr || out == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded(err, [&] {
        auto handle = new orbe_model{orbe::model_from_json_text(text)};
        *out = handle;
        return ORBE_OK;
    });
}

int orbe_model_to_json(const orbe_model* m, int indent, char** out_json, char** err) {
    if (m == nullptr || out_json == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded(err, [&] {
        *out_json = dup_string(orbe::model_to_json_text(m->m, indent));
        return ORBE_OK;
    });
}

int orbe_model_save(const orbe_model* m, const char* path, char** err) {
    if (m == nullptr || path == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    return guarded(err, [&] {
        orbe::save_model(m->m, path);
        return ORBE_OK;
    });
}

int orbe_gen_gridworld(const char* config_json, orbe_model** out, char** err) {
    if (out == nullptr) return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded(err, [&] {
        const json opts = parse_options(config_json);
        orbe::GridworldConfig cfg;
        if (opts.contains("width")) cfg.width = opts["width"].get<int>();
        if (opts.contains("height")) cfg.height = opts["height"].get<int>();
        if (opts.contains("obstacles")) cfg.obstacles = opts["obstacles"].get<int>();
        if (opts.contains("nu")) cfg.nu = opts["nu"].get<double>();
        if (opts.contains("p")) cfg.p = opts["p"].get<double>();
        if (opts.contains("q_max")) cfg.q_max = opts["q_max"].get<double>();
        if (opts.contains("seed")) cfg.seed = opts["seed"].get<std::uint64_t>();
        if (opts.contains("gamma")) cfg.gamma = opts["gamma"].get<double>();
        if (opts.contains("variant")) {
            const std::string v = opts["variant"].get<std::string>();
            if (v == "imdp") cfg.variant = orbe::GridVariant::Imdp;
            else if (v == "srect") cfg.variant = orbe::GridVariant::Srect;
            else throw orbe::ValidationError("variant must be \"imdp\" or \"srect\"");
        }
        auto handle = new orbe_model{orbe::gen_gridworld(cfg)};
        *out = handle;
        return ORBE_OK;
    });
}

int orbe_solve(const orbe_model* m, const char* options_json, char** out_json, char** err) {
    if (m == nullptr || out_json == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded(err, [&] {
        const json opts = parse_options(options_json);
        const orbe::SolverConfig cfg = solver_config_from(opts);
        orbe::Adversary adv = orbe::default_adversary(m->m);
        if (opts.contains("adversary")) {
            const std::string a = opts["adversary"].get<std::string>();
            if (a == "min") adv = orbe::Adversary::Min;
            else if (a == "max") adv = orbe::Adversary::Max;
            else throw orbe::ValidationError("adversary must be \"min\" or \"max\"");
        }
        const bool allow_nonconverged =
            opts.contains("allow_nonconverged") && opts["allow_nonconverged"].get<bool>();

        const orbe::RobustSolution sol = orbe::robust_value_iteration(m->m, cfg, adv);
        if (!sol.converged && !allow_nonconverged)
            throw orbe::ConvergenceError(
                "robust value iteration did not converge within its budget");

        json out;
        out["robust_return"] = dot(m->m.initial, sol.value);
        out["value"] = sol.value;
        out["policy"] = sol.policy;
        out["iterations"] = sol.iterations;
        out["converged"] = sol.converged;
        out["oscillation_warning"] = sol.oscillation_warning;
        out["adversary"] = sol.adversary == orbe::Adversary::Min ? "min" : "max";
        if (opts.contains("include_worst_transition") &&
            opts["include_worst_transition"].get<bool>())
            out["worst_transition"] = sol.worst_transition;
        *out_json = dup_string(out.dump(2) + "\n");
        return ORBE_OK;
    });
}

int orbe_compute_orbe(const orbe_model* m, const char* options_json, char** out_json,
                      char** err) {
    if (m == nullptr || out_json == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded(err, [&] {
        const json opts = parse_options(options_json);
        orbe::OrbeConfig cfg;
        cfg.solver = solver_config_from(opts);
        if (opts.contains("tol")) cfg.candidate_tolerance = opts["tol"].get<double>();
        if (opts.contains("derivative_tolerance"))
            cfg.derivative_tolerance = opts["derivative_tolerance"].get<double>();
        if (opts.contains("perturbation_step"))
            cfg.perturbation_step = opts["perturbation_step"].get<double>();
        const orbe::OrbeReport report = orbe::compute_orbe(m->m, cfg);
        *out_json = dup_string(orbe::orbe_report_to_json_text(report));
        return ORBE_OK;
    });
}

int orbe_evaluate_policy(const orbe_model* m, const char* policy_json,
                         const char* options_json, char** out_json, char** err) {
    if (m == nullptr || out_json == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded(err, [&] {
        const json opts = parse_options(options_json);
        const orbe::SolverConfig cfg = solver_config_from(opts);
        const orbe::Policy pi = policy_from_json_text(m->m, policy_json);
        const std::vector<int> actions = deterministic_actions(m->m, pi);

        bool at_worst = true;
        if (opts.contains("at")) {
            const std::string at = opts["at"].get<std::string>();
            if (at == "worst") at_worst = true;
            else if (at == "best") at_worst = false;
            else throw orbe::ValidationError("at must be \"worst\" or \"best\"");
        }
        orbe::CandidateSet fixed(actions.size());
        for (std::size_t s = 0; s < actions.size(); ++s) fixed[s] = {actions[s]};
        const orbe::Adversary robust_dir = orbe::default_adversary(m->m);
        const orbe::Adversary adv =
            at_worst ? robust_dir
                     : (robust_dir == orbe::Adversary::Min ? orbe::Adversary::Max
                                                           : orbe::Adversary::Min);
        const orbe::RobustSolution sol =
            orbe::robust_value_iteration(m->m, cfg, adv, &fixed);
        if (!sol.converged)
            throw orbe::ConvergenceError(
                "fixed-policy evaluation did not converge within its budget");

        // Polish away the epsilon-stop tail: the extremal kernel is fixed at
        // convergence, and the policy's value under it solves a linear system.
        orbe::Vec value;
        const orbe::Real ret =
            orbe::evaluate_policy_exact(m->m, pi, sol.worst_transition, &value);

        json out;
        out["return"] = ret;
        out["value"] = value;
        out["iterations"] = sol.iterations;
        out["converged"] = sol.converged;
        *out_json = dup_string(out.dump(2) + "\n");
        return ORBE_OK;
    });
}

int orbe_be_fraction(const orbe_model* m, const char* policy_json, double* out_pct,
                     char** err) {
    if (m == nullptr || out_pct == nullptr)
        return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_pct = 0.0;
    return guarded(err, [&] {
        const orbe::Policy pi = policy_from_json_text(m->m, policy_json);
        *out_pct = orbe::be_action_fraction(m->m, pi);
        return ORBE_OK;
    });
}

int orbe_bench(const char* config_json, char** out_csv, char** err) {
    if (out_csv == nullptr) return fail(err, ORBE_ERR_INVALID_ARGUMENT, "null argument");
    *out_csv = nullptr;
    return guarded(err, [&] {
        const json opts = parse_options(config_json);
        orbe::BenchConfig cfg;
        if (opts.contains("sizes")) cfg.sizes = opts["sizes"].get<std::vector<int>>();
        if (opts.contains("nus")) cfg.nus = opts["nus"].get<std::vector<double>>();
        if (opts.contains("seeds")) cfg.seeds = opts["seeds"].get<int>();
        if (opts.contains("seed_base")) cfg.seed_base = opts["seed_base"].get<std::uint64_t>();
        if (opts.contains("variant")) {
            const std::string v = opts["variant"].get<std::string>();
            if (v == "imdp") cfg.variant = orbe::GridVariant::Imdp;
            else if (v == "srect") cfg.variant = orbe::GridVariant::Srect;
            else throw orbe::ValidationError("variant must be \"imdp\" or \"srect\"");
        }
        if (opts.contains("gamma")) cfg.gamma = opts["gamma"].get<double>();
        if (opts.contains("p")) cfg.p = opts["p"].get<double>();
        if (opts.contains("q_max")) cfg.q_max = opts["q_max"].get<double>();
        if (opts.contains("obstacle_fraction"))
            cfg.obstacle_fraction = opts["obstacle_fraction"].get<double>();
        if (opts.contains("epsilon")) cfg.solver.epsilon = opts["epsilon"].get<double>();
        if (opts.contains("max_iterations"))
            cfg.solver.max_iterations = opts["max_iterations"].get<int>();
        if (opts.contains("jobs")) cfg.jobs = opts["jobs"].get<int>();
        const std::vector<orbe::BenchResultRow> rows = orbe::run_bench(cfg);
        *out_csv = dup_string(orbe::bench_to_csv(rows));
        return ORBE_OK;
    });
}

}  // extern "C"
