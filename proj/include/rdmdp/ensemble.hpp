#pragma once

#include "rdmdp/mdp.hpp"

#include <utility>
#include <vector>

namespace rdmdp {

/// Finite sample space of a random transition kernel with its prior.
/// The kernel is realized once and then fixed; the prior never concentrates.
struct KernelEnsemble {
    std::vector<Kernel> kernels;
    numvec prior;

    KernelEnsemble(std::vector<Kernel> kernels_, numvec prior_)
        : kernels(std::move(kernels_)), prior(std::move(prior_)) {
        if (kernels.empty()) throw invariant_error("KernelEnsemble: needs at least one kernel");
        if (prior.size() != kernels.size())
            throw dimension_error("KernelEnsemble: prior length != kernel count");
        check_distribution(prior, 1e-12, "KernelEnsemble prior");
        for (const Kernel& k : kernels)
            if (k.num_states() != kernels.front().num_states() ||
                k.num_actions() != kernels.front().num_actions())
                throw dimension_error("KernelEnsemble: kernels have inconsistent shapes");
    }

    std::size_t size() const { return kernels.size(); }
    int num_states() const { return kernels.front().num_states(); }
    int num_actions() const { return kernels.front().num_actions(); }
};

/// Posterior-style weights over an ensemble's kernels.
using BeliefWeights = numvec;

inline void check_weights(const KernelEnsemble& ensemble, const BeliefWeights& weights) {
    if (weights.size() != ensemble.size())
        throw dimension_error("belief weights length != ensemble size");
    check_distribution(weights, 1e-12, "belief weights");
}

/// How per-kernel value vectors are produced throughout the planners and
/// attack pipelines.
///
/// `exact` is the LU fixed point. `iterative` runs Gauss-Seidel sweeps over
/// *all* kernels of the ensemble in lockstep from V = 0 and stops when the
/// largest sweep change across every kernel falls below the threshold (a
/// joint stopping rule, so slow-mixing chains keep the fast ones sweeping).
/// The reference experiments on the three-state environment use the
/// iterative mode with threshold 0.1.
struct EvalMethod {
    enum class Kind { exact, iterative };
    Kind kind = Kind::exact;
    real_t threshold = 1e-10;
    long max_sweeps = default_sweep_cap;

    static EvalMethod exact() { return {}; }
    static EvalMethod iterative(real_t threshold, long max_sweeps = default_sweep_cap) {
        return {Kind::iterative, threshold, max_sweeps};
    }
};

/// Evaluates one policy under every kernel of the ensemble with the joint
/// stopping rule described on EvalMethod.
inline std::vector<ValueVector> evaluate_policy_iterative(const TabularMdp& mdp,
                                                          const KernelEnsemble& ensemble,
                                                          const PolicyTable& policy,
                                                          real_t threshold,
                                                          long max_sweeps = default_sweep_cap) {
    if (!(threshold > 0.0)) throw invariant_error("threshold must be positive");
    const int S = mdp.num_states();
    std::vector<Matrix> chains;
    std::vector<numvec> rbars;
    chains.reserve(ensemble.size());
    rbars.reserve(ensemble.size());
    for (const Kernel& k : ensemble.kernels) {
        detail::check_shapes(mdp, k, policy);
        auto [p, rbar] = detail::induced_chain(mdp, k, policy);
        chains.push_back(std::move(p));
        rbars.push_back(std::move(rbar));
    }
    std::vector<ValueVector> values(ensemble.size(), numvec(S, 0.0));
    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        real_t delta = 0.0;
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            numvec& v = values[i];
            for (int s = 0; s < S; ++s) {
                real_t acc = rbars[i][s];
                for (int sp = 0; sp < S; ++sp) acc += mdp.discount() * chains[i](s, sp) * v[sp];
                delta = std::max(delta, std::abs(v[s] - acc));
                v[s] = acc;
            }
        }
        if (delta < threshold) return values;
    }
    throw convergence_error("ensemble policy evaluation: sweep cap exceeded");
}

/// Per-kernel values of one policy under the chosen evaluation method.
inline std::vector<ValueVector> evaluate_policy(const TabularMdp& mdp,
                                                const KernelEnsemble& ensemble,
                                                const PolicyTable& policy,
                                                const EvalMethod& method) {
    if (method.kind == EvalMethod::Kind::iterative)
        return evaluate_policy_iterative(mdp, ensemble, policy, method.threshold,
                                         method.max_sweeps);
    std::vector<ValueVector> values;
    values.reserve(ensemble.size());
    for (const Kernel& k : ensemble.kernels) values.push_back(evaluate_policy_exact(mdp, k, policy));
    return values;
}

/// E_X V^pi_X(s) under the given weights, with exact per-kernel evaluation.
inline ValueVector expected_values(const TabularMdp& mdp, const KernelEnsemble& ensemble,
                                   const BeliefWeights& weights, const PolicyTable& policy) {
    check_weights(ensemble, weights);
    numvec out(mdp.num_states(), 0.0);
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        if (weights[i] == 0.0) continue;
        ValueVector v = evaluate_policy_exact(mdp, ensemble.kernels[i], policy);
        for (int s = 0; s < mdp.num_states(); ++s) out[s] += weights[i] * v[s];
    }
    return out;
}

/// Weights-mixture of Q-tables over the ensemble given per-kernel values:
/// sum_i w_i [ rbar_i(s,a) + gamma sum_s' X_i(s'|s,a) v_i(s') ].
inline Matrix q_values_mixed(const TabularMdp& mdp, const KernelEnsemble& ensemble,
                             const BeliefWeights& weights,
                             const std::vector<ValueVector>& per_kernel_values) {
    check_weights(ensemble, weights);
    if (per_kernel_values.size() != ensemble.size())
        throw dimension_error("q_values_mixed: value list length != ensemble size");
    Matrix mixed(mdp.num_states(), mdp.num_actions());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        if (weights[i] == 0.0) continue;
        Matrix qi = q_values(mdp, ensemble.kernels[i], per_kernel_values[i]);
        for (int s = 0; s < mdp.num_states(); ++s)
            for (int a = 0; a < mdp.num_actions(); ++a) mixed(s, a) += weights[i] * qi(s, a);
    }
    return mixed;
}

} // namespace rdmdp
