#pragma once

// Experiment runners behind the CLI: each takes a params object (with
// defaults), writes its artifacts under the output directory, and returns a
// summary. A manifest.json records the config fingerprint, seed and toolkit
// version so reruns are comparable.

#include "rdmdp/rdmdp.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace rdmdp::cli {

inline constexpr const char* toolkit_version = "0.1.0";

struct ExperimentConfig {
    std::string experiment;
    json params = json::object();
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

inline const std::set<std::string>& known_experiments() {
    static const std::set<std::string> names{
        "table2",        "thm51_trace",        "rd_attack_planning",
        "budget_regret", "budget_mi",          "blockworld_qlearning",
        "permutation_attack", "value_surface", "fano_check"};
    return names;
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.experiment = j.at("experiment").get<std::string>();
    if (!known_experiments().count(cfg.experiment))
        throw invariant_error("unknown experiment: " + cfg.experiment);
    cfg.params = j.value("params", json::object());
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = j.value("output_dir", std::string("out"));
    return cfg;
}

namespace detail {

/// All artifact writes funnel through here; paths stay inside the output dir.
class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& filename, const std::string& body) {
        if (filename.find('/') != std::string::npos || filename.find("..") != std::string::npos)
            throw invariant_error("artifact filenames must stay inside the output directory");
        std::ofstream out(dir_ / filename, std::ios::binary);
        out << body;
        files_.push_back(filename);
    }

    const std::vector<std::string>& files() const { return files_; }
    std::filesystem::path path() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

inline std::string csv_real(real_t v) { return rdmdp::detail::csv_real(v); }

inline EvalMethod eval_method_from(const json& params) {
    const std::string kind = params.value("eval", std::string("sweep"));
    if (kind == "exact") return EvalMethod::exact();
    if (kind == "sweep")
        return EvalMethod::iterative(params.value("eval_threshold", 0.1));
    throw invariant_error("eval must be 'exact' or 'sweep'");
}

inline JointChannel channel_from_params(const json& params, const numvec& prior) {
    if (params.contains("channel")) return channel_from_json(params.at("channel"), prior);
    // default: the uninformative channel over the ensemble
    const int n = static_cast<int>(prior.size());
    Matrix likelihood(n, n, numvec(static_cast<std::size_t>(n) * n, 1.0 / n));
    return JointChannel(prior, std::move(likelihood));
}

inline Matrix cost_from_params(const json& params) {
    Matrix cost(2, 2);
    cost(0, 1) = params.value("c1", 1.5);
    cost(1, 0) = params.value("c2", 2.0);
    return cost;
}

inline numvec budgets_from_params(const json& params) {
    if (params.contains("budgets")) return params.at("budgets").get<numvec>();
    numvec budgets;
    const real_t step = params.value("budget_step", 0.0025);
    const real_t last = params.value("budget_max", 0.9);
    for (real_t b = 0.0; b <= last + 1e-12; b += step) budgets.push_back(b);
    return budgets;
}

} // namespace detail

// --- individual experiments --------------------------------------------------

inline json run_table2(const json&, std::uint64_t, detail::OutputDir& out) {
    const EnvironmentSpec env = two_state_env();
    const char* names[4] = {"pi1", "pi2", "pi3", "pi4"};
    const indvec policies[4] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    std::string csv = "policy,EV_state0,EV_state1\n";
    json values = json::object();
    for (int k = 0; k < 4; ++k) {
        const ValueVector ev = expected_values(env.mdp, env.ensemble, env.ensemble.prior,
                                               PolicyTable::deterministic(policies[k]));
        csv += std::string(names[k]) + ',' + detail::csv_real(ev[0]) + ',' +
               detail::csv_real(ev[1]) + '\n';
        values[names[k]] = ev;
    }
    out.write("table2.csv", csv);
    return {{"expected_values", values}};
}

inline json run_thm51_trace(const json& params, std::uint64_t, detail::OutputDir& out) {
    const EnvironmentSpec env = three_state_cycle_env();
    const EvalMethod method = detail::eval_method_from(params);
    const PolicyTable pi0 = PolicyTable::deterministic({0, 1, 2});

    const ExtendedPiResult pi = extended_policy_iteration(env.mdp, env.ensemble,
                                                          env.ensemble.prior, pi0,
                                                          params.value("max_iters", 50), method);
    const ExpectedValueArgmax search =
        exhaustive_expected_value_maximizer(env.mdp, env.ensemble, env.ensemble.prior, method);
    const PlanReport regret_plan =
        exhaustive_regret_optimal_policy(env.mdp, env.ensemble, env.ensemble.prior, method);

    out.write("trace.json", extended_pi_trace_to_json(pi).dump(2) + "\n");
    json summary{{"initial_policy", policy_to_json(pi0)},
                 {"fixed_point", policy_to_json(pi.policy)},
                 {"reached_fixed_point", pi.reached_fixed_point},
                 {"per_kernel_values", pi.trace.front().per_kernel_values},
                 {"expected_value_search",
                  {{"exists_common_optimum", search.exists_common_optimum},
                   {"common_optima", search.common_optima}}},
                 {"regret_plan", plan_report_to_json(regret_plan)}};
    return summary;
}

inline json run_rd_attack_planning(const json& params, std::uint64_t, detail::OutputDir& out) {
    const EnvironmentSpec env =
        environment_by_name(params.value("env", std::string("three_state_cycle")));
    const EvalMethod method = detail::eval_method_from(params);
    const JointChannel channel = detail::channel_from_params(params, env.ensemble.prior);
    Matrix cost(channel.num_x(), channel.num_y());
    if (params.contains("cost")) {
        const auto& rows = params.at("cost");
        for (int x = 0; x < cost.rows(); ++x)
            for (int y = 0; y < cost.cols(); ++y) cost(x, y) = rows.at(x).at(y).get<real_t>();
    }
    const AttackChannel attack(channel, std::move(cost), params.value("budget", 0.0));
    const RegretReport report = measure_regret(env.mdp, env.ensemble, attack, method);
    out.write("report.json", regret_report_to_json(report).dump(2) + "\n");
    return {{"regret", report.regret},
            {"regret_fraction", report.regret_fraction},
            {"expectation_form_regret", report.expectation_form_regret}};
}

inline json run_budget_curve(const json& params, CurveMode mode, detail::OutputDir& out) {
    const EnvironmentSpec env =
        environment_by_name(params.value("env", std::string("three_state_cycle")));
    const EvalMethod method = detail::eval_method_from(params);
    const auto rows =
        regret_vs_budget_curve(env.mdp, env.ensemble, detail::cost_from_params(params),
                               detail::budgets_from_params(params), mode,
                               params.value("grid_step", 0.005), method);
    out.write("curve.csv", curve_to_csv(rows));

    const real_t saturated = rows.back().regret;
    real_t first_budget = rows.back().budget;
    if (mode == CurveMode::max_regret) {
        for (const CurveRow& row : rows)
            if (row.regret >= saturated - 1e-9) {
                first_budget = row.budget;
                break;
            }
    } else {
        std::size_t idx = rows.size();
        while (idx > 0 && rows[idx - 1].regret >= saturated - 1e-9) --idx;
        first_budget = rows[idx].budget;
    }
    return {{"rows", rows.size()},
            {"saturated_regret", saturated},
            {"saturated_fraction", rows.back().regret_fraction},
            {"saturation_budget", first_budget}};
}

inline json run_blockworld_qlearning(const json& params, std::uint64_t seed,
                                     detail::OutputDir& out) {
    const numvec alphas = params.value("alphas", numvec{0.8, 0.2});
    const numvec prior = params.value("prior", numvec(alphas.size(), 1.0 / alphas.size()));
    const EnvironmentSpec env = block_world_ensemble(alphas, prior);
    const JointChannel channel = detail::channel_from_params(params, prior);

    QLearnConfig qcfg;
    qcfg.episodes = params.value("episodes", 50'000);
    qcfg.max_steps = params.value("max_steps", 100);
    qcfg.learning_rate = params.value("learning_rate", 0.5);
    qcfg.lr_decay = params.value("lr_decay", 0.01);
    qcfg.eps_start = params.value("eps_start", 1.0);
    qcfg.eps_end = params.value("eps_end", 0.05);
    qcfg.seed = seed;

    const int runs = params.value("runs", 20);
    const ModelFreeAttackResult result =
        run_rate_distortion_model_free(env, channel, runs, seed, qcfg);

    std::string csv = "state,attack_regret,baseline_regret\n";
    for (std::size_t i = 0; i < result.states.size(); ++i)
        csv += std::to_string(result.states[i]) + ',' +
               detail::csv_real(result.attack_regret[i]) + ',' +
               detail::csv_real(result.baseline_regret[i]) + '\n';
    out.write("regret_by_start_state.csv", csv);

    bool dominates = true;
    for (std::size_t i = 0; i < result.states.size(); ++i)
        if (result.attack_regret[i] <= result.baseline_regret[i]) dominates = false;
    return {{"runs", runs},
            {"states", result.states},
            {"attack_regret", result.attack_regret},
            {"baseline_regret", result.baseline_regret},
            {"attack_dominates_everywhere", dominates}};
}

inline json run_permutation_attack(const json& params, std::uint64_t seed,
                                   detail::OutputDir& out) {
    const EnvironmentSpec env = permutation_family_env();
    PermutationExperimentConfig cfg;
    cfg.episodes = params.value("episodes", 20);
    cfg.steps_per_episode = params.value("steps", 100);
    cfg.smoothing = params.value("smoothing", 0.0);
    const int runs = params.value("runs", 100);

    std::vector<int> histogram(env.ensemble.size(), 0);
    numvec per_episode_mean(cfg.episodes, 0.0);
    real_t zero_info = 0.0;
    for (int run = 0; run < runs; ++run) {
        cfg.seed = seed + 101 * static_cast<std::uint64_t>(run);
        const PermutationExperimentResult r = run_permutation_attack_experiment(env, cfg);
        zero_info = r.zero_information_regret;
        for (int id : r.identified) ++histogram[id];
        for (int e = 0; e < cfg.episodes; ++e) per_episode_mean[e] += r.per_episode_regret[e] / runs;
    }

    std::string csv = "episode,mean_regret\n";
    for (int e = 0; e < cfg.episodes; ++e)
        csv += std::to_string(e + 1) + ',' + detail::csv_real(per_episode_mean[e]) + '\n';
    out.write("per_episode_regret.csv", csv);

    numvec posterior(histogram.size());
    const real_t total = static_cast<real_t>(runs) * cfg.episodes;
    real_t tv = 0.0;
    for (std::size_t i = 0; i < histogram.size(); ++i) {
        posterior[i] = histogram[i] / total;
        tv += std::abs(posterior[i] - 1.0 / histogram.size());
    }
    return {{"runs", runs},
            {"identification_posterior", posterior},
            {"posterior_tv_from_uniform", tv / 2.0},
            {"zero_information_regret", zero_info},
            {"per_episode_mean_regret", per_episode_mean}};
}

inline json run_value_surface(const json& params, std::uint64_t, detail::OutputDir& out) {
    const EnvironmentSpec env = two_state_env();
    const numvec prior = params.value("prior", env.ensemble.prior);
    const ValueSurface surface = random_policy_value_surface(
        env.mdp, env.ensemble, prior, params.value("resolution", 101));
    out.write("surface.csv", surface_to_csv(surface));
    auto pairs = [](const std::vector<std::pair<real_t, real_t>>& pts) {
        json arr = json::array();
        for (const auto& [a, b] : pts) arr.push_back({a, b});
        return arr;
    };
    return {{"resolution", surface.resolution},
            {"argmax_state0", pairs(surface.argmax_state0)},
            {"argmax_state1", pairs(surface.argmax_state1)}};
}

inline json run_fano_check(const json& params, std::uint64_t, detail::OutputDir& out) {
    const EnvironmentSpec env =
        environment_by_name(params.value("env", std::string("three_state_cycle")));
    const EvalMethod method = detail::eval_method_from(params);
    const JointChannel channel = detail::channel_from_params(params, env.ensemble.prior);
    const FanoCertificate cert = fano_certificate(env.mdp, env.ensemble, channel, method);
    out.write("certificate.json", fano_to_json(cert).dump(2) + "\n");
    return fano_to_json(cert);
}

/// Dispatches one experiment, writes its artifacts and the manifest, and
/// returns the summary. Identical config+seed reproduce identical artifact
/// bytes; only the manifest timestamp differs between reruns.
inline json run(const ExperimentConfig& config) {
    detail::OutputDir out(config.output_dir);
    json summary;
    if (config.experiment == "table2") summary = run_table2(config.params, config.seed, out);
    else if (config.experiment == "thm51_trace")
        summary = run_thm51_trace(config.params, config.seed, out);
    else if (config.experiment == "rd_attack_planning")
        summary = run_rd_attack_planning(config.params, config.seed, out);
    else if (config.experiment == "budget_regret")
        summary = run_budget_curve(config.params, CurveMode::max_regret, out);
    else if (config.experiment == "budget_mi")
        summary = run_budget_curve(config.params, CurveMode::min_mi, out);
    else if (config.experiment == "blockworld_qlearning")
        summary = run_blockworld_qlearning(config.params, config.seed, out);
    else if (config.experiment == "permutation_attack")
        summary = run_permutation_attack(config.params, config.seed, out);
    else if (config.experiment == "value_surface")
        summary = run_value_surface(config.params, config.seed, out);
    else if (config.experiment == "fano_check")
        summary = run_fano_check(config.params, config.seed, out);
    else
        throw invariant_error("unknown experiment: " + config.experiment);

    const json fingerprint{{"experiment", config.experiment},
                           {"params", config.params},
                           {"seed", config.seed}};
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    json manifest{{"experiment", config.experiment},
                  {"seed", config.seed},
                  {"config_hash", fnv1a_hash(fingerprint.dump())},
                  {"toolkit_version", toolkit_version},
                  {"outputs", out.files()},
                  {"timestamp_ms",
                   std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
                  {"summary", summary}};
    out.write("manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

} // namespace rdmdp::cli
