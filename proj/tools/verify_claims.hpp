#pragma once

// The `verify` battery: every desk-checkable number the toolkit is expected
// to reproduce, as named claims with expected value, measured value and
// tolerance. Environments can be overridden from JSON files, so corrupting a
// reward table makes exactly the dependent claims fail.

#include "rdmdp/rdmdp.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace rdmdp::cli {

struct ClaimResult {
    std::string measured;
    bool pass = false;
};

struct Claim {
    std::string name; ///< group.claim, filterable by substring
    std::string expected;
    std::function<ClaimResult()> run;
};

class ClaimContext {
public:
    void override_environment(const EnvironmentSpec& env) { overrides_.insert_or_assign(env.name, env); }

    EnvironmentSpec environment(const std::string& name) const {
        const auto it = overrides_.find(name);
        return it != overrides_.end() ? it->second : environment_by_name(name);
    }

private:
    std::map<std::string, EnvironmentSpec> overrides_;
};

namespace detail {

inline std::string fmt4(real_t v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string fmt_policy(const indvec& actions) {
    std::string s = "{";
    for (std::size_t i = 0; i < actions.size(); ++i)
        s += (i ? "," : "") + std::to_string(actions[i]);
    return s + "}";
}

inline JointChannel uninformative2() {
    Matrix l(2, 2);
    l(0, 0) = l(0, 1) = l(1, 0) = l(1, 1) = 0.5;
    return JointChannel({0.5, 0.5}, std::move(l));
}

} // namespace detail

inline std::vector<Claim> build_claims(const ClaimContext& ctx) {
    const EvalMethod sweep = EvalMethod::iterative(0.1);
    std::vector<Claim> claims;

    // --- two-state expected-value table -------------------------------------
    {
        const real_t expected[4][2] = {{1.41, 5.89}, {4.65, 5.17}, {4.65, 5.17}, {1.41, 5.89}};
        const indvec policies[4] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        for (int k = 0; k < 4; ++k) {
            claims.push_back(
                {"table2.policy" + std::to_string(k + 1),
                 "(" + detail::fmt4(expected[k][0]) + ", " + detail::fmt4(expected[k][1]) +
                     ") +/- 0.01",
                 [ctx, k, policies, expected] {
                     const EnvironmentSpec env = ctx.environment("two_state");
                     const ValueVector ev =
                         expected_values(env.mdp, env.ensemble, env.ensemble.prior,
                                         PolicyTable::deterministic(policies[k]));
                     const real_t err = std::max(std::abs(ev[0] - expected[k][0]),
                                                 std::abs(ev[1] - expected[k][1]));
                     return ClaimResult{"(" + detail::fmt4(ev[0]) + ", " + detail::fmt4(ev[1]) + ")",
                                        err <= 0.01};
                 }});
        }
    }

    // --- three-state trace ---------------------------------------------------
    claims.push_back({"thm51.optimal_policies", "{0,1,2} and {2,0,1}", [ctx] {
                          const EnvironmentSpec env = ctx.environment("three_state_cycle");
                          const auto p1 =
                              optimal_policy_fixed_kernel(env.mdp, env.ensemble.kernels[0]).first;
                          const auto p2 =
                              optimal_policy_fixed_kernel(env.mdp, env.ensemble.kernels[1]).first;
                          return ClaimResult{detail::fmt_policy(p1.actions()) + " and " +
                                                 detail::fmt_policy(p2.actions()),
                                             p1.actions() == indvec{0, 1, 2} &&
                                                 p2.actions() == indvec{2, 0, 1}};
                      }});
    claims.push_back(
        {"thm51.values_x1", "(7.858, 7.858, 8.658) +/- 0.005", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const auto values = evaluate_policy_iterative(
                 env.mdp, env.ensemble, PolicyTable::deterministic({0, 1, 2}), sweep.threshold);
             const real_t expected[3] = {7.858, 7.858, 8.658};
             real_t err = 0.0;
             for (int s = 0; s < 3; ++s) err = std::max(err, std::abs(values[0][s] - expected[s]));
             return ClaimResult{"(" + detail::fmt4(values[0][0]) + ", " +
                                    detail::fmt4(values[0][1]) + ", " +
                                    detail::fmt4(values[0][2]) + ")",
                                err <= 0.005};
         }});
    claims.push_back(
        {"thm51.values_x2", "(0.911, 0.911, 1.020) +/- 0.005", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const auto values = evaluate_policy_iterative(
                 env.mdp, env.ensemble, PolicyTable::deterministic({0, 1, 2}), sweep.threshold);
             const real_t expected[3] = {0.911, 0.911, 1.02};
             real_t err = 0.0;
             for (int s = 0; s < 3; ++s) err = std::max(err, std::abs(values[1][s] - expected[s]));
             return ClaimResult{"(" + detail::fmt4(values[1][0]) + ", " +
                                    detail::fmt4(values[1][1]) + ", " +
                                    detail::fmt4(values[1][2]) + ")",
                                err <= 0.005};
         }});
    claims.push_back(
        {"thm51.q_table", "corners 4.43 / 4.88 (all entries +/- 0.01)", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const auto values = evaluate_policy_iterative(
                 env.mdp, env.ensemble, PolicyTable::deterministic({0, 1, 2}), sweep.threshold);
             const Matrix q = q_values_mixed(env.mdp, env.ensemble, env.ensemble.prior, values);
             const real_t expected[3][3] = {{4.43, 4.02, 4.10},
                                            {4.08, 4.43, 4.01},
                                            {4.05, 4.47, 4.88}};
             real_t err = 0.0;
             for (int s = 0; s < 3; ++s)
                 for (int a = 0; a < 3; ++a)
                     err = std::max(err, std::abs(q(s, a) - expected[s][a]));
             return ClaimResult{"Q(0,left)=" + detail::fmt4(q(0, 0)) +
                                    ", Q(2,stay)=" + detail::fmt4(q(2, 2)) +
                                    ", max err " + detail::fmt4(err),
                                err <= 0.01};
         }});
    claims.push_back({"thm51.extended_pi_fixed_point", "stays at {0,1,2}", [ctx, sweep] {
                          const EnvironmentSpec env = ctx.environment("three_state_cycle");
                          const ExtendedPiResult pi = extended_policy_iteration(
                              env.mdp, env.ensemble, env.ensemble.prior,
                              PolicyTable::deterministic({0, 1, 2}), 50, sweep);
                          return ClaimResult{detail::fmt_policy(pi.policy.actions()),
                                             pi.reached_fixed_point &&
                                                 pi.policy.actions() == indvec{0, 1, 2}};
                      }});
    claims.push_back(
        {"thm51.exhaustive_search", "common expected-value optimum {0,0,2}", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const ExpectedValueArgmax search = exhaustive_expected_value_maximizer(
                 env.mdp, env.ensemble, env.ensemble.prior, sweep);
             std::string got = search.exists_common_optimum
                                   ? detail::fmt_policy(search.common_optima[0])
                                   : std::string("none");
             return ClaimResult{got, search.exists_common_optimum &&
                                         search.common_optima.size() == 1 &&
                                         search.common_optima[0] == indvec{0, 0, 2}};
         }});
    claims.push_back({"thm51.kernel_permutation", "X2 actions = X1 actions shifted", [ctx] {
                          const EnvironmentSpec env = ctx.environment("three_state_cycle");
                          const Kernel& x1 = env.ensemble.kernels[0];
                          const Kernel& x2 = env.ensemble.kernels[1];
                          bool ok = true;
                          for (int s = 0; s < 3 && ok; ++s)
                              for (int sp = 0; sp < 3 && ok; ++sp)
                                  ok = x2.prob(0, s, sp) == x1.prob(1, s, sp) &&
                                       x2.prob(1, s, sp) == x1.prob(2, s, sp) &&
                                       x2.prob(2, s, sp) == x1.prob(0, s, sp);
                          return ClaimResult{ok ? "holds" : "broken", ok};
                      }});

    // --- uninformative attack ------------------------------------------------
    claims.push_back(
        {"rd_attack.regret", "3.84 +/- 0.05", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const AttackChannel attack(detail::uninformative2(), Matrix(2, 2), 0.0);
             const RegretReport report = measure_regret(env.mdp, env.ensemble, attack, sweep);
             return ClaimResult{detail::fmt4(report.regret),
                                std::abs(report.regret - 3.84) <= 0.05};
         }});
    claims.push_back(
        {"rd_attack.regret_fraction", "0.443 +/- 0.01", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const AttackChannel attack(detail::uninformative2(), Matrix(2, 2), 0.0);
             const RegretReport report = measure_regret(env.mdp, env.ensemble, attack, sweep);
             return ClaimResult{detail::fmt4(report.regret_fraction),
                                std::abs(report.regret_fraction - 0.443) <= 0.01};
         }});
    claims.push_back({"rd_attack.posterior", "uniform for every observation", [ctx] {
                          const EnvironmentSpec env = ctx.environment("three_state_cycle");
                          const JointChannel channel = detail::uninformative2();
                          bool ok = true;
                          for (int y = 0; y < 2; ++y) {
                              const BeliefWeights post =
                                  posterior_after_observation(env.ensemble, channel, y);
                              ok = ok && std::abs(post[0] - 0.5) < 1e-12 &&
                                   std::abs(post[1] - 0.5) < 1e-12;
                          }
                          return ClaimResult{ok ? "p(X|Y=y) = (0.5, 0.5)" : "not uniform", ok};
                      }});

    // --- Fano chain ------------------------------------------------------------
    claims.push_back(
        {"fano.uninformative", "Pe=0.5, H(X|Y)=1 bit, I=0, bound holds", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             const FanoCertificate cert =
                 fano_certificate(env.mdp, env.ensemble, detail::uninformative2(), sweep);
             const bool ok = std::abs(cert.pe_map - 0.5) < 1e-12 &&
                             std::abs(cert.hxy - 1.0) < 1e-12 && std::abs(cert.mi) < 1e-12 &&
                             cert.bound_lhs >= cert.hxy - 1e-9;
             return ClaimResult{"Pe=" + detail::fmt4(cert.pe_map) +
                                    ", H(X|Y)=" + detail::fmt4(cert.hxy) +
                                    ", I=" + detail::fmt4(cert.mi),
                                ok};
         }});
    claims.push_back({"fano.table7_decoder", "identity decoding, Pe=0.15", [] {
                          const JointChannel table7 =
                              parametric_binary_channel({0.5, 0.5}, 0.1, 0.2);
                          const MapDecoder map = map_decoder(table7);
                          const bool ok = map.decode[0] == 0 && map.decode[1] == 1 &&
                                          std::abs(map.pe - 0.15) < 1e-12;
                          return ClaimResult{"Pe=" + detail::fmt4(map.pe), ok};
                      }});
    claims.push_back({"fano.table7_posterior", "(0.8182, 0.1818) +/- 1e-4", [ctx] {
                          const EnvironmentSpec env = ctx.environment("three_state_cycle");
                          const BeliefWeights post = posterior_after_observation(
                              env.ensemble, parametric_binary_channel({0.5, 0.5}, 0.1, 0.2), 0);
                          return ClaimResult{"(" + detail::fmt4(post[0]) + ", " +
                                                 detail::fmt4(post[1]) + ")",
                                             std::abs(post[0] - 0.8182) <= 1e-4};
                      }});

    // --- budget curves -----------------------------------------------------
    claims.push_back(
        {"budget.regret_saturation", "first saturated at B = 0.711 +/- 0.01", [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             Matrix cost(2, 2);
             cost(0, 1) = 1.5;
             cost(1, 0) = 2.0;
             numvec budgets;
             for (real_t b = 0.0; b <= 0.9 + 1e-12; b += 0.0025) budgets.push_back(b);
             const auto rows = regret_vs_budget_curve(env.mdp, env.ensemble, cost, budgets,
                                                      CurveMode::max_regret, 0.005, sweep);
             const real_t saturated = rows.back().regret;
             real_t first = rows.back().budget;
             for (const CurveRow& row : rows)
                 if (row.regret >= saturated - 1e-9) {
                     first = row.budget;
                     break;
                 }
             return ClaimResult{"B = " + detail::fmt4(first) + " at fraction " +
                                    detail::fmt4(rows.back().regret_fraction),
                                std::abs(first - 0.711) <= 0.01};
         }});
    claims.push_back(
        {"mi.regret_saturation", "min-MI attack saturates at B = 0.7285 +/- 0.01",
         [ctx, sweep] {
             const EnvironmentSpec env = ctx.environment("three_state_cycle");
             Matrix cost(2, 2);
             cost(0, 1) = 1.5;
             cost(1, 0) = 2.0;
             numvec budgets;
             for (real_t b = 0.0; b <= 0.9 + 1e-12; b += 0.0025) budgets.push_back(b);
             const auto rows = regret_vs_budget_curve(env.mdp, env.ensemble, cost, budgets,
                                                      CurveMode::min_mi, 0.005, sweep);
             const real_t saturated = rows.back().regret;
             std::size_t idx = rows.size();
             while (idx > 0 && rows[idx - 1].regret >= saturated - 1e-9) --idx;
             const bool endpoints = std::abs(rows.front().mi_bits - 1.0) < 1e-12;
             return ClaimResult{"B = " + detail::fmt4(rows[idx].budget) +
                                    ", MI(0) = " + detail::fmt4(rows.front().mi_bits),
                                endpoints && std::abs(rows[idx].budget - 0.7285) <= 0.01};
         }});

    // --- value surface -------------------------------------------------------
    claims.push_back(
        {"surface.state0_argmax", "coordinate pair {1, 0.37} within one cell", [ctx] {
             const EnvironmentSpec env = ctx.environment("two_state");
             const ValueSurface surface =
                 random_policy_value_surface(env.mdp, env.ensemble, env.ensemble.prior, 101);
             bool found = false;
             std::string got;
             for (const auto& [a, b] : surface.argmax_state0) {
                 got += "(" + detail::fmt4(a) + "," + detail::fmt4(b) + ") ";
                 const bool direct = std::abs(a - 1.0) <= 0.015 && std::abs(b - 0.37) <= 0.015;
                 const bool swapped = std::abs(b - 1.0) <= 0.015 && std::abs(a - 0.37) <= 0.015;
                 found = found || direct || swapped;
             }
             return ClaimResult{got, found};
         }});
    claims.push_back({"surface.state1_argmax", "corner (0, 0) exactly", [ctx] {
                          const EnvironmentSpec env = ctx.environment("two_state");
                          const ValueSurface surface = random_policy_value_surface(
                              env.mdp, env.ensemble, env.ensemble.prior, 101);
                          bool found = false;
                          for (const auto& [a, b] : surface.argmax_state1)
                              found = found || (a == 0.0 && b == 0.0);
                          return ClaimResult{found ? "(0, 0) attained" : "missing", found};
                      }});

    // --- environment constructions ------------------------------------------
    claims.push_back({"env.blockworld_slip", "east splits 0.8 / 0.1 / 0.1", [ctx] {
                          const EnvironmentSpec env = ctx.environment("block_world");
                          const Kernel& k = env.ensemble.kernels[0];
                          const bool ok = std::abs(k.prob(0, 8, 9) - 0.8) < 1e-12 &&
                                          std::abs(k.prob(0, 8, 4) - 0.1) < 1e-12 &&
                                          std::abs(k.prob(0, 8, 8) - 0.1) < 1e-12;
                          return ClaimResult{"(" + detail::fmt4(k.prob(0, 8, 9)) + ", " +
                                                 detail::fmt4(k.prob(0, 8, 4)) + ", " +
                                                 detail::fmt4(k.prob(0, 8, 8)) + ")",
                                             ok};
                      }});
    claims.push_back({"env.blockworld_live_states", "9 live states", [ctx] {
                          const EnvironmentSpec env = ctx.environment("block_world");
                          const auto absorbing = absorbing_zero_reward_states(
                              env.mdp, env.ensemble.kernels[0]);
                          int live = 0;
                          for (bool a : absorbing)
                              if (!a) ++live;
                          return ClaimResult{std::to_string(live), live == 9};
                      }});
    claims.push_back({"env.permutation_family", "6 distinct kernels, top reward 3.3", [ctx] {
                          const EnvironmentSpec env = ctx.environment("permutation_family");
                          bool distinct = true;
                          for (std::size_t i = 0; i < env.ensemble.size(); ++i)
                              for (std::size_t j = i + 1; j < env.ensemble.size(); ++j)
                                  if (env.ensemble.kernels[i] == env.ensemble.kernels[j])
                                      distinct = false;
                          real_t top = -1e18;
                          for (int s = 0; s < 3; ++s)
                              for (int a = 0; a < 3; ++a)
                                  top = std::max(top, env.mdp.reward(s, a, 0));
                          const bool ok = distinct && env.ensemble.size() == 6 &&
                                          std::abs(top - 3.3) < 1e-12 &&
                                          std::abs(env.mdp.reward(2, 1, 0) - 3.3) < 1e-12;
                          return ClaimResult{std::string(distinct ? "distinct" : "duplicated") +
                                                 ", top reward " + detail::fmt4(top),
                                             ok};
                      }});

    return claims;
}

/// Runs every claim whose name contains the filter; prints one line each.
/// Returns the number of failed claims.
inline int verify_all(const ClaimContext& ctx, const std::string& filter = "") {
    const std::vector<Claim> claims = build_claims(ctx);
    int failures = 0;
    int ran = 0;
    std::printf("%-28s  %-44s  %-40s  %s\n", "claim", "expected", "measured", "status");
    for (const Claim& claim : claims) {
        if (!filter.empty() && claim.name.find(filter) == std::string::npos) continue;
        ++ran;
        ClaimResult result;
        try {
            result = claim.run();
        } catch (const std::exception& e) {
            result = {std::string("exception: ") + e.what(), false};
        }
        if (!result.pass) ++failures;
        std::printf("%-28s  %-44s  %-40s  %s\n", claim.name.c_str(), claim.expected.c_str(),
                    result.measured.c_str(), result.pass ? "PASS" : "FAIL");
    }
    std::printf("%d/%d claims passed\n", ran - failures, ran);
    return failures;
}

} // namespace rdmdp::cli
