// Command-line front end over the orbe C API: solve robust MDPs, refine to
// optimal-robust best-effort policies, generate gridworld benchmarks,
// evaluate policies, and run the experiment matrix.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "orbe_c.h"

using nlohmann::json;

namespace {

/// Exit codes: 0 success, 1 validation/input error, 2 non-convergence,
/// 3 internal numeric failure.
int exit_code_for(int api_code) {
    switch (api_code) {
        case ORBE_OK: return 0;
        case ORBE_ERR_VALIDATION: return 1;
        case ORBE_ERR_NONCONVERGENCE: return 2;
        case ORBE_ERR_NUMERIC: return 3;
        case ORBE_ERR_INVALID_ARGUMENT: return 1;
    }
    return 3;
}

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { orbe_string_free(s); }
};

struct OwnedModel {
    orbe_model* m = nullptr;
    ~OwnedModel() { orbe_model_free(m); }
};

[[nodiscard]] int report_failure(int code, const char* err) {
    std::cerr << "error: " << (err != nullptr ? err : "unknown failure") << "\n";
    return exit_code_for(code);
}

bool write_file(const std::string& path, const std::string& content, std::string& err) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err = "cannot open '" + path + "' for writing";
        return false;
    }
    out << content;
    out.close();
    if (!out) {
        err = "failed writing '" + path + "'";
        return false;
    }
    return true;
}

bool read_file(const std::string& path, std::string& content, std::string& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err = "cannot open '" + path + "'";
        return false;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
    return true;
}

std::uint64_t default_seed() {
    const char* env = std::getenv("ORBE_RMDP_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        return std::stoull(env);
    } catch (const std::exception&) {
        return 0;
    }
}

void print_fixed(const char* label, double x) {
    std::printf("%s %.6f\n", label, x);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbe: robust MDP solving with optimal-robust best-effort refinement"};
    app.set_version_flag("--version", orbe_version());
    app.require_subcommand(1);

    // -------------------------------------------------------------- solve
    std::string solve_model, solve_adversary, solve_out_value, solve_out_policy;
    double solve_epsilon = 1e-4;
    int solve_max_iters = 1000;
    bool solve_allow_nonconverged = false;
    auto* solve = app.add_subcommand("solve", "Robust value iteration on a model file");
    solve->add_option("model", solve_model, "model JSON file")->required();
    solve->add_option("--epsilon", solve_epsilon, "convergence threshold");
    solve->add_option("--max-iters", solve_max_iters, "iteration budget");
    solve->add_option("--adversary", solve_adversary, "min|max (default from model sense)");
    solve->add_flag("--allow-nonconverged", solve_allow_nonconverged,
                    "report a non-converged fixed point instead of failing");
    solve->add_option("--out-value", solve_out_value, "write the value function JSON here");
    solve->add_option("--out-policy", solve_out_policy, "write the policy JSON here");

    // --------------------------------------------------------------- orbe
    std::string orbe_model_path, orbe_report_path, orbe_out_policy;
    double orbe_epsilon = 1e-4, orbe_tol = -1.0;
    int orbe_max_iters = 1000;
    auto* orbe_cmd = app.add_subcommand("orbe", "Optimal-robust best-effort refinement");
    orbe_cmd->add_option("model", orbe_model_path, "model JSON file")->required();
    orbe_cmd->add_option("--epsilon", orbe_epsilon, "solver convergence threshold");
    orbe_cmd->add_option("--max-iters", orbe_max_iters, "solver iteration budget");
    orbe_cmd->add_option("--tol", orbe_tol, "candidate tolerance (default 10*epsilon)");
    orbe_cmd->add_option("--report", orbe_report_path, "write the refinement report here");
    orbe_cmd->add_option("--out-policy", orbe_out_policy, "write the policy JSON here");

    // ------------------------------------------------------ gen-gridworld
    std::string gen_out, gen_variant = "imdp";
    int gen_width = 10, gen_height = 10, gen_obstacles = 10;
    double gen_nu = 0.5, gen_p = 0.25, gen_q_max = 0.1, gen_gamma = 0.99;
    std::uint64_t gen_seed = default_seed();
    auto* gen = app.add_subcommand("gen-gridworld", "Generate a slippery-gridworld model");
    gen->add_option("--width", gen_width, "grid width");
    gen->add_option("--height", gen_height, "grid height");
    gen->add_option("--obstacles", gen_obstacles, "number of obstacle cells");
    gen->add_option("--nu", gen_nu, "fraction of states declaring the BE twin first");
    gen->add_option("--p", gen_p, "worst-case slip probability");
    gen->add_option("--q-max", gen_q_max, "maximum slip improvement");
    gen->add_option("--seed", gen_seed, "generator seed (default from ORBE_RMDP_SEED)");
    gen->add_option("--variant", gen_variant, "imdp|srect");
    gen->add_option("--gamma", gen_gamma, "discount");
    gen->add_option("--out", gen_out, "output model file")->required();

    // ------------------------------------------------------------ evaluate
    std::string eval_model, eval_policy_path, eval_at = "worst";
    double eval_epsilon = 1e-4;
    int eval_max_iters = 1000;
    bool eval_be_fraction = false;
    auto* eval = app.add_subcommand("evaluate", "Evaluate a policy against the uncertainty");
    eval->add_option("model", eval_model, "model JSON file")->required();
    eval->add_option("--policy", eval_policy_path, "policy JSON file")->required();
    eval->add_option("--at", eval_at, "worst|best adversary (default worst)");
    eval->add_option("--epsilon", eval_epsilon, "convergence threshold");
    eval->add_option("--max-iters", eval_max_iters, "iteration budget");
    eval->add_flag("--be-fraction", eval_be_fraction,
                   "also print the best-effort action percentage");

    // --------------------------------------------------------------- bench
    std::vector<int> bench_sizes{100, 400};
    std::vector<double> bench_nus{0.0, 0.5, 1.0};
    int bench_seeds = 10, bench_jobs = 1, bench_max_iters = 1000;
    std::uint64_t bench_seed_base = default_seed();
    std::string bench_variant = "srect", bench_out;
    double bench_gamma = 0.99, bench_p = 0.25, bench_q_max = 0.1;
    double bench_obstacle_fraction = 0.1, bench_epsilon = 1e-4;
    auto* bench = app.add_subcommand("bench", "Run the benchmark experiment matrix");
    bench->add_option("--sizes", bench_sizes, "state counts")->delimiter(',');
    bench->add_option("--nus", bench_nus, "BE-first fractions")->delimiter(',');
    bench->add_option("--seeds", bench_seeds, "seeds per cell");
    bench->add_option("--seed-base", bench_seed_base, "first seed (default from ORBE_RMDP_SEED)");
    bench->add_option("--variant", bench_variant, "imdp|srect");
    bench->add_option("--gamma", bench_gamma, "discount");
    bench->add_option("--p", bench_p, "worst-case slip probability");
    bench->add_option("--q-max", bench_q_max, "maximum slip improvement");
    bench->add_option("--obstacle-fraction", bench_obstacle_fraction,
                      "obstacles as a fraction of cells");
    bench->add_option("--epsilon", bench_epsilon, "solver convergence threshold");
    bench->add_option("--max-iters", bench_max_iters, "solver iteration budget");
    bench->add_option("--jobs", bench_jobs, "concurrent cells");
    bench->add_option("--out", bench_out, "output CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    if (solve->parsed()) {
        OwnedModel model;
        OwnedString err;
        int rc = orbe_model_load(solve_model.c_str(), &model.m, &err.s);
        if (rc != ORBE_OK) return report_failure(rc, err.s);

        json opts;
        opts["epsilon"] = solve_epsilon;
        opts["max_iterations"] = solve_max_iters;
        if (!solve_adversary.empty()) opts["adversary"] = solve_adversary;
        if (solve_allow_nonconverged) opts["allow_nonconverged"] = true;

        OwnedString result, err2;
        rc = orbe_solve(model.m, opts.dump().c_str(), &result.s, &err2.s);
        if (rc != ORBE_OK) return report_failure(rc, err2.s);

        const json out = json::parse(result.s);
        print_fixed("robust_return", out["robust_return"].get<double>());
        std::string ioerr;
        if (!solve_out_value.empty()) {
            const json v{{"value", out["value"]}};
            if (!write_file(solve_out_value, v.dump(2) + "\n", ioerr)) {
                std::cerr << "error: " << ioerr << "\n";
                return 1;
            }
        }
        if (!solve_out_policy.empty()) {
            const json p{{"policy", out["policy"]}};
            if (!write_file(solve_out_policy, p.dump(2) + "\n", ioerr)) {
                std::cerr << "error: " << ioerr << "\n";
                return 1;
            }
        }
        return 0;
    }

    if (orbe_cmd->parsed()) {
        OwnedModel model;
        OwnedString err;
        int rc = orbe_model_load(orbe_model_path.c_str(), &model.m, &err.s);
        if (rc != ORBE_OK) return report_failure(rc, err.s);

        json opts;
        opts["epsilon"] = orbe_epsilon;
        opts["max_iterations"] = orbe_max_iters;
        if (orbe_tol >= 0.0) opts["tol"] = orbe_tol;

        OwnedString result, err2;
        rc = orbe_compute_orbe(model.m, opts.dump().c_str(), &result.s, &err2.s);
        if (rc != ORBE_OK) return report_failure(rc, err2.s);

        const json out = json::parse(result.s);
        std::printf("stage_reached %s\n", out["stage_reached"].get<std::string>().c_str());
        print_fixed("robust_value", out["robust_value"].get<double>());
        std::string ioerr;
        if (!orbe_report_path.empty()) {
            if (!write_file(orbe_report_path, std::string(result.s), ioerr)) {
                std::cerr << "error: " << ioerr << "\n";
                return 1;
            }
        }
        if (!orbe_out_policy.empty()) {
            const json p{{"policy", out["policy"]}};
            if (!write_file(orbe_out_policy, p.dump(2) + "\n", ioerr)) {
                std::cerr << "error: " << ioerr << "\n";
                return 1;
            }
        }
        return 0;
    }

    if (gen->parsed()) {
        json cfg;
        cfg["width"] = gen_width;
        cfg["height"] = gen_height;
        cfg["obstacles"] = gen_obstacles;
        cfg["nu"] = gen_nu;
        cfg["p"] = gen_p;
        cfg["q_max"] = gen_q_max;
        cfg["seed"] = gen_seed;
        cfg["variant"] = gen_variant;
        cfg["gamma"] = gen_gamma;

        OwnedModel model;
        OwnedString err;
        int rc = orbe_gen_gridworld(cfg.dump().c_str(), &model.m, &err.s);
        if (rc != ORBE_OK) return report_failure(rc, err.s);
        OwnedString err2;
        rc = orbe_model_save(model.m, gen_out.c_str(), &err2.s);
        if (rc != ORBE_OK) return report_failure(rc, err2.s);
        return 0;
    }

    if (eval->parsed()) {
        OwnedModel model;
        OwnedString err;
        int rc = orbe_model_load(eval_model.c_str(), &model.m, &err.s);
        if (rc != ORBE_OK) return report_failure(rc, err.s);

        std::string policy_text, ioerr;
        if (!read_file(eval_policy_path, policy_text, ioerr)) {
            std::cerr << "error: " << ioerr << "\n";
            return 1;
        }
        json opts;
        opts["at"] = eval_at;
        opts["epsilon"] = eval_epsilon;
        opts["max_iterations"] = eval_max_iters;

        OwnedString result, err2;
        rc = orbe_evaluate_policy(model.m, policy_text.c_str(), opts.dump().c_str(),
                                  &result.s, &err2.s);
        if (rc != ORBE_OK) return report_failure(rc, err2.s);
        const json out = json::parse(result.s);
        print_fixed("return", out["return"].get<double>());
        if (eval_be_fraction) {
            double pct = 0.0;
            OwnedString err3;
            rc = orbe_be_fraction(model.m, policy_text.c_str(), &pct, &err3.s);
            if (rc != ORBE_OK) return report_failure(rc, err3.s);
            print_fixed("be_fraction", pct);
        }
        return 0;
    }

    if (bench->parsed()) {
        json cfg;
        cfg["sizes"] = bench_sizes;
        cfg["nus"] = bench_nus;
        cfg["seeds"] = bench_seeds;
        cfg["seed_base"] = bench_seed_base;
        cfg["variant"] = bench_variant;
        cfg["gamma"] = bench_gamma;
        cfg["p"] = bench_p;
        cfg["q_max"] = bench_q_max;
        cfg["obstacle_fraction"] = bench_obstacle_fraction;
        cfg["epsilon"] = bench_epsilon;
        cfg["max_iterations"] = bench_max_iters;
        cfg["jobs"] = bench_jobs;

        OwnedString csv, err;
        const int rc = orbe_bench(cfg.dump().c_str(), &csv.s, &err.s);
        if (rc != ORBE_OK) return report_failure(rc, err.s);
        std::string ioerr;
        if (!write_file(bench_out, std::string(csv.s), ioerr)) {
            std::cerr << "error: " << ioerr << "\n";
            return 1;
        }
        return 0;
    }

    return 0;
}
