// Command-line front end: every experiment as a subcommand, JSON configs in,
// CSV/JSON artifacts out. Exit codes: 0 success, 1 claim or verification
// failure, 2 configuration error.

#include "experiments.hpp"
#include "verify_claims.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace rdmdp;
using namespace rdmdp::cli;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invariant_error("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    double grid_step = 0.005;
    std::string format = "csv";
    bool seed_set = false;
    bool out_set = false;
    bool grid_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "RNG seed")->each([&opts](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--out", opts.out_dir, "output directory")->each([&opts](const std::string&) {
        opts.out_set = true;
    });
    cmd->add_option("--grid-step", opts.grid_step, "grid step for (p1,p2) searches")
        ->each([&opts](const std::string&) { opts.grid_set = true; });
    cmd->add_option("--format", opts.format, "summary format on stdout")
        ->check(CLI::IsMember({"csv", "json"}));
}

/// Builds the effective config: the file (if given) first, CLI flags on top,
/// the subcommand default experiment where nothing was said.
ExperimentConfig make_config(const CommonOpts& opts, const std::string& default_experiment) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = config_from_json(load_json_file(opts.config_path));
    } else {
        cfg.experiment = default_experiment;
    }
    if (opts.seed_set || opts.config_path.empty()) cfg.seed = opts.seed;
    if (opts.out_set || opts.config_path.empty()) cfg.output_dir = opts.out_dir;
    if (opts.grid_set) cfg.params["grid_step"] = opts.grid_step;
    return cfg;
}

void print_certificate_table(const json& cert) {
    std::printf("%-22s %s\n", "quantity", "value");
    const std::pair<const char*, const char*> rows[] = {
        {"pe_map", "MAP decoder error Pe"},
        {"h_pe", "binary entropy H(Pe) [bits]"},
        {"hxy", "conditional entropy H(X|Y) [bits]"},
        {"mi", "mutual information I(X;Y) [bits]"},
        {"bound_lhs", "H(Pe) + Pe log2|Omega(X)|"},
        {"weakened_pe_lower", "(H(X|Y)-1)/log2|Omega(X)|"},
        {"epsilon_gap", "epsilon gap"},
        {"regret_lower", "regret lower bound eps*Pe"},
    };
    for (const auto& [key, label] : rows)
        std::printf("%-36s %.6f\n", label, cert.at(key).get<double>());
}

int run_and_report(const ExperimentConfig& cfg, const std::string& format) {
    const json manifest = rdmdp::cli::run(cfg);
    if (format == "json") {
        std::cout << manifest.dump(2) << "\n";
    } else {
        std::printf("experiment %s -> %s (seed %llu)\n", cfg.experiment.c_str(),
                    cfg.output_dir.c_str(), static_cast<unsigned long long>(cfg.seed));
        for (const auto& f : manifest.at("outputs"))
            std::printf("  wrote %s\n", f.get<std::string>().c_str());
        if (cfg.experiment == "fano_check")
            print_certificate_table(manifest.at("summary"));
        else
            std::printf("summary: %s\n", manifest.at("summary").dump().c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular MDPs with random transition kernels: planning, "
                 "rate-distortion attacks and regret certificates"};
    app.require_subcommand(1);

    // env dump <name>
    auto* env_cmd = app.add_subcommand("env", "environment registry");
    env_cmd->require_subcommand(1);
    std::string env_name;
    auto* dump_cmd = env_cmd->add_subcommand("dump", "print an environment as JSON");
    dump_cmd
        ->add_option("name", env_name,
                     "two_state | three_state_cycle | block_world | permutation_family")
        ->required();

    struct SubSpec {
        const char* command;
        const char* experiment;
        const char* help;
    };
    const SubSpec subs[] = {
        {"plan", "thm51_trace", "planning trace and exhaustive searches on the cycle ensemble"},
        {"attack", "rd_attack_planning", "measure regret under a designed channel"},
        {"curve", "budget_regret", "budget sweep (regret-max or MI-min mode)"},
        {"qlearn", "blockworld_qlearning", "model-free victim in the slip grid world"},
        {"permute", "permutation_attack", "random state-relabeling attack on trajectories"},
        {"fano", "fano_check", "decoder error and the Fano certificate for a channel"},
        {"surface", "value_surface", "random-policy expected-value surface"},
    };
    std::map<std::string, CommonOpts> opts;
    std::map<std::string, CLI::App*> cmds;
    for (const SubSpec& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.command, sub.help);
        add_common(cmd, opts[sub.command]);
        cmds[sub.command] = cmd;
    }
    // plan and curve take a mode/experiment selector
    std::string plan_experiment = "thm51_trace";
    cmds["plan"]
        ->add_option("experiment", plan_experiment, "table2 | thm51_trace")
        ->check(CLI::IsMember({"table2", "thm51_trace"}));
    std::string curve_mode = "max_regret";
    cmds["curve"]
        ->add_option("--mode", curve_mode, "max_regret | min_mi")
        ->check(CLI::IsMember({"max_regret", "min_mi"}));

    // verify [--filter] [--override-env file...]
    auto* verify_cmd = app.add_subcommand("verify", "run the golden-claim battery");
    std::string filter;
    std::vector<std::string> env_overrides;
    verify_cmd->add_option("--filter", filter, "only run claims whose name contains this");
    verify_cmd->add_option("--override-env", env_overrides,
                           "environment JSON replacing the built-in of the same name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dump_cmd->parsed()) {
            std::cout << environment_to_json(environment_by_name(env_name)).dump(2) << "\n";
            return 0;
        }
        if (verify_cmd->parsed()) {
            ClaimContext ctx;
            for (const std::string& path : env_overrides)
                ctx.override_environment(environment_from_json(load_json_file(path)));
            return verify_all(ctx, filter) == 0 ? 0 : 1;
        }
        for (const SubSpec& sub : subs) {
            if (!cmds[sub.command]->parsed()) continue;
            std::string experiment = sub.experiment;
            if (std::string(sub.command) == "plan") experiment = plan_experiment;
            if (std::string(sub.command) == "curve" && curve_mode == "min_mi")
                experiment = "budget_mi";
            const ExperimentConfig cfg = make_config(opts[sub.command], experiment);
            return run_and_report(cfg, opts[sub.command].format);
        }
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const dimension_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const invariant_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
