#pragma once

#include "rdmdp/attack.hpp"
#include "rdmdp/environments.hpp"
#include "rdmdp/planning.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>

namespace rdmdp {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON document schemas. Reals are plain decimal JSON numbers; nlohmann emits
// the shortest round-trip representation, so dump/parse cycles are identity.
// ---------------------------------------------------------------------------

inline json mdp_to_json(const TabularMdp& mdp) {
    json reward = json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        json per_action = json::array();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            json row = json::array();
            for (int sp = 0; sp < mdp.num_states(); ++sp) row.push_back(mdp.reward(s, a, sp));
            per_action.push_back(std::move(row));
        }
        reward.push_back(std::move(per_action));
    }
    return {{"S", mdp.num_states()},
            {"A", mdp.num_actions()},
            {"gamma", mdp.discount()},
            {"reward", std::move(reward)}};
}

inline TabularMdp mdp_from_json(const json& j) {
    const int S = j.at("S").get<int>();
    const int A = j.at("A").get<int>();
    numvec reward;
    reward.reserve(static_cast<std::size_t>(S) * A * S);
    for (const auto& per_action : j.at("reward"))
        for (const auto& row : per_action)
            for (const auto& v : row) reward.push_back(v.get<real_t>());
    return TabularMdp(S, A, std::move(reward), j.at("gamma").get<real_t>());
}

inline json kernel_to_json(const Kernel& kernel) {
    json probs = json::array();
    for (int a = 0; a < kernel.num_actions(); ++a) {
        json per_state = json::array();
        for (int s = 0; s < kernel.num_states(); ++s) {
            json row = json::array();
            for (int sp = 0; sp < kernel.num_states(); ++sp) row.push_back(kernel.prob(a, s, sp));
            per_state.push_back(std::move(row));
        }
        probs.push_back(std::move(per_state));
    }
    return {{"probs", std::move(probs)}};
}

inline Kernel kernel_from_json(const json& j) {
    const auto& probs = j.at("probs");
    const int A = static_cast<int>(probs.size());
    const int S = static_cast<int>(probs.at(0).size());
    numvec data;
    data.reserve(static_cast<std::size_t>(A) * S * S);
    for (const auto& per_state : probs)
        for (const auto& row : per_state)
            for (const auto& v : row) data.push_back(v.get<real_t>());
    return Kernel(A, S, std::move(data));
}

inline json policy_to_json(const PolicyTable& policy) {
    if (policy.is_deterministic()) return {{"det", policy.actions()}};
    json probs = json::array();
    for (int s = 0; s < policy.probs().rows(); ++s) {
        json row = json::array();
        for (int a = 0; a < policy.probs().cols(); ++a) row.push_back(policy.probs()(s, a));
        probs.push_back(std::move(row));
    }
    return {{"probs", std::move(probs)}};
}

inline PolicyTable policy_from_json(const json& j) {
    if (j.contains("det")) return PolicyTable::deterministic(j.at("det").get<indvec>());
    const auto& probs = j.at("probs");
    const int S = static_cast<int>(probs.size());
    const int A = static_cast<int>(probs.at(0).size());
    Matrix m(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) m(s, a) = probs.at(s).at(a).get<real_t>();
    return PolicyTable::random(std::move(m));
}

inline json ensemble_to_json(const KernelEnsemble& ensemble) {
    json kernels = json::array();
    for (const Kernel& k : ensemble.kernels) kernels.push_back(kernel_to_json(k));
    return {{"kernels", std::move(kernels)}, {"prior", ensemble.prior}};
}

inline KernelEnsemble ensemble_from_json(const json& j) {
    std::vector<Kernel> kernels;
    for (const auto& k : j.at("kernels")) kernels.push_back(kernel_from_json(k));
    return KernelEnsemble(std::move(kernels), j.at("prior").get<numvec>());
}

inline json environment_to_json(const EnvironmentSpec& env) {
    return {{"name", env.name},
            {"mdp", mdp_to_json(env.mdp)},
            {"ensemble", ensemble_to_json(env.ensemble)},
            {"notes", env.notes}};
}

inline EnvironmentSpec environment_from_json(const json& j) {
    return {j.at("name").get<std::string>(), mdp_from_json(j.at("mdp")),
            ensemble_from_json(j.at("ensemble")), j.value("notes", std::string())};
}

inline json channel_to_json(const JointChannel& channel) {
    json likelihood = json::array();
    for (int x = 0; x < channel.num_x(); ++x) {
        json row = json::array();
        for (int y = 0; y < channel.num_y(); ++y) row.push_back(channel.likelihood()(x, y));
        likelihood.push_back(std::move(row));
    }
    return {{"prior", channel.prior()}, {"likelihood", std::move(likelihood)}};
}

/// Accepts either an explicit likelihood matrix or the parametric two-kernel
/// form {"parametric": {"p1": .., "p2": ..}}.
inline JointChannel channel_from_json(const json& j, const numvec& default_prior = {}) {
    numvec prior = j.contains("prior") ? j.at("prior").get<numvec>() : default_prior;
    if (j.contains("parametric")) {
        const auto& p = j.at("parametric");
        return parametric_binary_channel(prior, p.at("p1").get<real_t>(),
                                         p.at("p2").get<real_t>());
    }
    const auto& rows = j.at("likelihood");
    const int X = static_cast<int>(rows.size());
    const int Y = static_cast<int>(rows.at(0).size());
    Matrix likelihood(X, Y);
    for (int x = 0; x < X; ++x)
        for (int y = 0; y < Y; ++y) likelihood(x, y) = rows.at(x).at(y).get<real_t>();
    return JointChannel(std::move(prior), std::move(likelihood));
}

inline json fano_to_json(const FanoCertificate& cert) {
    return {{"pe_map", cert.pe_map},
            {"h_pe", cert.h_pe},
            {"hxy", cert.hxy},
            {"mi", cert.mi},
            {"bound_lhs", cert.bound_lhs},
            {"weakened_pe_lower", cert.weakened_pe_lower},
            {"epsilon_gap", cert.epsilon_gap},
            {"regret_lower", cert.regret_lower}};
}

inline json plan_report_to_json(const PlanReport& report) {
    return {{"policy", policy_to_json(report.policy)},
            {"expected_values", report.expected_values},
            {"per_kernel_values", report.per_kernel_values},
            {"objective", report.objective},
            {"num_ties", report.num_ties}};
}

inline json regret_report_to_json(const RegretReport& report) {
    json per_pair = json::array();
    for (int x = 0; x < report.per_pair_regret.rows(); ++x) {
        json row = json::array();
        for (int y = 0; y < report.per_pair_regret.cols(); ++y)
            row.push_back(report.per_pair_regret(x, y));
        per_pair.push_back(std::move(row));
    }
    json attacked = json::array();
    for (const auto& v : report.attacked_value_expectation)
        attacked.push_back(v ? json(*v) : json(nullptr));
    json victims = json::array();
    for (const auto& p : report.victim_policies)
        victims.push_back(p ? policy_to_json(*p) : json(nullptr));
    json out{{"regret", report.regret},
             {"per_pair_regret", std::move(per_pair)},
             {"regret_fraction", report.regret_fraction},
             {"attacked_value_expectation", std::move(attacked)},
             {"expectation_form_regret", report.expectation_form_regret},
             {"victim_policies", std::move(victims)}};
    out["fano"] = report.fano ? fano_to_json(*report.fano) : json(nullptr);
    return out;
}

inline json extended_pi_trace_to_json(const ExtendedPiResult& result) {
    json trace = json::array();
    for (const PiTraceEntry& entry : result.trace) {
        json q = json::array();
        for (int s = 0; s < entry.mixed_q.rows(); ++s) {
            json row = json::array();
            for (int a = 0; a < entry.mixed_q.cols(); ++a) row.push_back(entry.mixed_q(s, a));
            q.push_back(std::move(row));
        }
        trace.push_back({{"policy", policy_to_json(entry.policy)},
                         {"per_kernel_values", entry.per_kernel_values},
                         {"mixed_q", std::move(q)}});
    }
    return {{"policy", policy_to_json(result.policy)},
            {"reached_fixed_point", result.reached_fixed_point},
            {"trace", std::move(trace)}};
}

// ---------------------------------------------------------------------------
// CSV emission.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_real(real_t v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace detail

inline std::string curve_to_csv(const std::vector<CurveRow>& rows) {
    std::string out = "B,p1,p2,regret,regret_fraction,mi_bits,pe,eps_pe\n";
    for (const CurveRow& r : rows) {
        out += detail::csv_real(r.budget) + ',' + detail::csv_real(r.p1) + ',' +
               detail::csv_real(r.p2) + ',' + detail::csv_real(r.regret) + ',' +
               detail::csv_real(r.regret_fraction) + ',' + detail::csv_real(r.mi_bits) + ',' +
               detail::csv_real(r.pe) + ',' + detail::csv_real(r.eps_pe) + '\n';
    }
    return out;
}

inline std::string surface_to_csv(const ValueSurface& surface) {
    std::string out = "theta0,theta1,EV_state0,EV_state1\n";
    for (const SurfacePoint& pt : surface.grid) {
        out += detail::csv_real(pt.theta0) + ',' + detail::csv_real(pt.theta1) + ',' +
               detail::csv_real(pt.ev_state0) + ',' + detail::csv_real(pt.ev_state1) + '\n';
    }
    return out;
}

/// Stable 64-bit FNV-1a hash of a string; used to fingerprint configs in run
/// manifests independently of platform hashing.
inline std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace rdmdp
