#pragma once

#include "rdmdp/ensemble.hpp"

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace rdmdp {

inline constexpr std::size_t default_enumeration_bound = 10'000'000;

namespace detail {

/// Number of deterministic policies A^S, guarded against overflow and the
/// enumeration bound.
inline std::size_t policy_count_checked(int num_states, int num_actions,
                                        std::size_t bound = default_enumeration_bound) {
    std::size_t count = 1;
    for (int s = 0; s < num_states; ++s) {
        if (count > bound / static_cast<std::size_t>(num_actions))
            throw enumeration_too_large(0, bound);
        count *= static_cast<std::size_t>(num_actions);
    }
    if (count > bound) throw enumeration_too_large(count, bound);
    return count;
}

/// Decodes policy index (mixed radix, state 0 most significant) so that
/// increasing index order is lexicographic order of the action tuple.
inline indvec decode_policy(std::size_t index, int num_states, int num_actions) {
    indvec actions(num_states);
    for (int s = num_states - 1; s >= 0; --s) {
        actions[s] = static_cast<int>(index % num_actions);
        index /= num_actions;
    }
    return actions;
}

} // namespace detail

/// Planning result for one belief over the ensemble.
struct PlanReport {
    PolicyTable policy;
    ValueVector expected_values;                ///< weights-mix of per_kernel_values
    std::vector<ValueVector> per_kernel_values; ///< V^pi_{X_i} per ensemble member
    real_t objective = 0.0;                     ///< expected sup-norm regret of `policy`
    int num_ties = 1;                           ///< how many policies attained the optimum
};

/// Reference planner: enumerates every deterministic policy and minimizes the
/// expected sup-norm regret against the per-kernel optima,
///   sum_i w_i || V^pi_{X_i} - V^{pi*(X_i)}_{X_i} ||_inf.
/// Ties break to the lexicographically smallest policy and are counted in the
/// report. Values (both V^pi and the per-kernel optimum references) come from
/// the same evaluation method, so the objective is internally consistent.
inline PlanReport exhaustive_regret_optimal_policy(const TabularMdp& mdp,
                                                   const KernelEnsemble& ensemble,
                                                   const BeliefWeights& weights,
                                                   const EvalMethod& method = EvalMethod::exact()) {
    check_weights(ensemble, weights);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const std::size_t count = detail::policy_count_checked(S, A);

    std::vector<ValueVector> reference(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        auto [pol, v_exact] = optimal_policy_fixed_kernel(mdp, ensemble.kernels[i]);
        reference[i] = evaluate_policy(mdp, ensemble, pol, method)[i];
    }

    real_t best_obj = 0.0;
    std::size_t best_index = 0;
    int ties = 0;
    std::vector<ValueVector> best_values;
    for (std::size_t idx = 0; idx < count; ++idx) {
        PolicyTable pol = PolicyTable::deterministic(detail::decode_policy(idx, S, A));
        std::vector<ValueVector> values = evaluate_policy(mdp, ensemble, pol, method);
        real_t obj = 0.0;
        for (std::size_t i = 0; i < ensemble.size(); ++i)
            obj += weights[i] * linf_distance(values[i], reference[i]);
        if (idx == 0 || obj < best_obj - 1e-12) {
            best_obj = obj;
            best_index = idx;
            best_values = std::move(values);
            ties = 1;
        } else if (obj <= best_obj + 1e-12) {
            ++ties;
        }
    }

    PlanReport report{PolicyTable::deterministic(detail::decode_policy(best_index, S, A)),
                      numvec(S, 0.0), std::move(best_values), best_obj, ties};
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        for (int s = 0; s < S; ++s)
            report.expected_values[s] += weights[i] * report.per_kernel_values[i][s];
    return report;
}

/// Result of the expected-value diagnostic search: which policies maximize
/// E_X V^pi_X(s) per state, and whether one policy tops every state at once
/// (for a fixed kernel it always does; for a random kernel it may not).
struct ExpectedValueArgmax {
    std::vector<std::vector<indvec>> per_state_argmax; ///< [state][k] = action tuple
    std::vector<indvec> common_optima;                 ///< intersection over states
    bool exists_common_optimum = false;
};

/// Enumerates all deterministic policies and collects, for each state, the set
/// maximizing the weighted expected value (within 1e-9 of the state maximum).
inline ExpectedValueArgmax
exhaustive_expected_value_maximizer(const TabularMdp& mdp, const KernelEnsemble& ensemble,
                                    const BeliefWeights& weights,
                                    const EvalMethod& method = EvalMethod::exact()) {
    check_weights(ensemble, weights);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const std::size_t count = detail::policy_count_checked(S, A);

    std::vector<numvec> expected(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        PolicyTable pol = PolicyTable::deterministic(detail::decode_policy(idx, S, A));
        std::vector<ValueVector> values = evaluate_policy(mdp, ensemble, pol, method);
        numvec ev(S, 0.0);
        for (std::size_t i = 0; i < ensemble.size(); ++i)
            for (int s = 0; s < S; ++s) ev[s] += weights[i] * values[i][s];
        expected[idx] = std::move(ev);
    }

    ExpectedValueArgmax out;
    out.per_state_argmax.resize(S);
    std::vector<std::vector<std::size_t>> argmax_indices(S);
    for (int s = 0; s < S; ++s) {
        real_t mx = expected[0][s];
        for (std::size_t idx = 1; idx < count; ++idx) mx = std::max(mx, expected[idx][s]);
        for (std::size_t idx = 0; idx < count; ++idx)
            if (expected[idx][s] >= mx - 1e-9) {
                argmax_indices[s].push_back(idx);
                out.per_state_argmax[s].push_back(detail::decode_policy(idx, S, A));
            }
    }
    for (std::size_t idx : argmax_indices[0]) {
        bool in_all = true;
        for (int s = 1; s < S && in_all; ++s) {
            in_all = false;
            for (std::size_t other : argmax_indices[s])
                if (other == idx) {
                    in_all = true;
                    break;
                }
        }
        if (in_all) out.common_optima.push_back(detail::decode_policy(idx, S, A));
    }
    out.exists_common_optimum = !out.common_optima.empty();
    return out;
}

/// One grid point of the two-parameter random-policy value surface.
struct SurfacePoint {
    real_t theta0;
    real_t theta1;
    real_t ev_state0;
    real_t ev_state1;
};

struct ValueSurface {
    int resolution = 0;
    std::vector<SurfacePoint> grid; ///< row-major, theta0 outer, theta1 inner
    /// All grid points within 1e-9 of the per-state maximum. Symmetric
    /// instances genuinely tie, so this is a set rather than one point.
    std::vector<std::pair<real_t, real_t>> argmax_state0;
    std::vector<std::pair<real_t, real_t>> argmax_state1;
};

/// Expected-value surface of the random policy pi(a=0|s) = theta_s on a 2-state,
/// 2-action MDP, over a uniform grid of (theta0, theta1) in [0,1]^2.
inline ValueSurface random_policy_value_surface(const TabularMdp& mdp,
                                                const KernelEnsemble& ensemble,
                                                const BeliefWeights& weights,
                                                int grid_resolution) {
    if (mdp.num_states() != 2 || mdp.num_actions() != 2)
        throw dimension_error("value surface requires a 2-state, 2-action MDP");
    if (grid_resolution < 2) throw invariant_error("grid resolution must be at least 2");
    check_weights(ensemble, weights);

    ValueSurface surface;
    surface.resolution = grid_resolution;
    surface.grid.reserve(static_cast<std::size_t>(grid_resolution) * grid_resolution);
    const real_t step = 1.0 / (grid_resolution - 1);
    real_t best0 = 0.0, best1 = 0.0;
    for (int i = 0; i < grid_resolution; ++i) {
        const real_t t0 = i * step;
        for (int j = 0; j < grid_resolution; ++j) {
            const real_t t1 = j * step;
            Matrix probs(2, 2);
            probs(0, 0) = t0;
            probs(0, 1) = 1.0 - t0;
            probs(1, 0) = t1;
            probs(1, 1) = 1.0 - t1;
            ValueVector ev =
                expected_values(mdp, ensemble, weights, PolicyTable::random(std::move(probs)));
            surface.grid.push_back({t0, t1, ev[0], ev[1]});
            if (surface.grid.size() == 1 || ev[0] > best0) best0 = ev[0];
            if (surface.grid.size() == 1 || ev[1] > best1) best1 = ev[1];
        }
    }
    for (const SurfacePoint& pt : surface.grid) {
        if (pt.ev_state0 >= best0 - 1e-9) surface.argmax_state0.emplace_back(pt.theta0, pt.theta1);
        if (pt.ev_state1 >= best1 - 1e-9) surface.argmax_state1.emplace_back(pt.theta0, pt.theta1);
    }
    return surface;
}

/// One step of the extended policy iteration trace.
struct PiTraceEntry {
    PolicyTable policy;
    std::vector<ValueVector> per_kernel_values;
    Matrix mixed_q; ///< prior-weighted Q-table used for the improvement step
};

struct ExtendedPiResult {
    PolicyTable policy;
    std::vector<PiTraceEntry> trace;
    bool reached_fixed_point = false;
};

/// Prior-weighted policy iteration over a kernel ensemble:
///   pi_{k+1}(s) = argmax_a sum_i w_i sum_s' X_i(s'|s,a)[r(s,a,s') + gamma V^{pi_k}_{X_i}(s')]
/// with per-kernel policy evaluation between updates. Stops early once the
/// policy repeats. The full trace is returned because this scheme is *not*
/// guaranteed to reach the regret- or expected-value-optimal policy, and the
/// trace is the evidence.
inline ExtendedPiResult extended_policy_iteration(const TabularMdp& mdp,
                                                  const KernelEnsemble& ensemble,
                                                  const BeliefWeights& weights,
                                                  const PolicyTable& initial_policy,
                                                  int max_iters,
                                                  const EvalMethod& method = EvalMethod::iterative(1e-10)) {
    check_weights(ensemble, weights);
    initial_policy.check_valid_for(mdp.num_states(), mdp.num_actions());
    if (!initial_policy.is_deterministic())
        throw invariant_error("extended policy iteration starts from a deterministic policy");
    if (max_iters < 1) throw invariant_error("max_iters must be at least 1");

    ExtendedPiResult result{initial_policy, {}, false};
    PolicyTable policy = initial_policy;
    for (int k = 0; k < max_iters; ++k) {
        std::vector<ValueVector> values = evaluate_policy(mdp, ensemble, policy, method);
        Matrix mixed = q_values_mixed(mdp, ensemble, weights, values);
        PolicyTable improved = greedy_policy(mixed);
        result.trace.push_back({policy, std::move(values), std::move(mixed)});
        if (improved == policy) {
            result.reached_fixed_point = true;
            break;
        }
        policy = std::move(improved);
    }
    result.policy = result.trace.back().policy;
    if (!result.reached_fixed_point) result.policy = policy;
    return result;
}

} // namespace rdmdp
