#pragma once

#include "rdmdp/attack.hpp"
#include "rdmdp/environments.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace rdmdp {

namespace detail {

/// Seeded RNG wrapper with hand-rolled draws, so results are bit-identical
/// for a given seed regardless of standard-library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// uniform double in [0, 1)
    real_t uniform() { return static_cast<real_t>(gen_() >> 11) * 0x1.0p-53; }

    /// uniform integer in [0, n)
    int uniform_int(int n) { return static_cast<int>(uniform() * n); }

    /// index drawn from an (unnormalized-tolerant) probability row
    int sample(std::span<const real_t> probs) {
        const real_t u = uniform();
        real_t acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace detail

struct TransitionStep {
    int state;
    int action;
    real_t reward;
    int next_state;
};

/// A rollout: consecutive steps chain (next_state of step k = state of k+1).
struct Trajectory {
    std::vector<TransitionStep> steps;

    bool chains() const {
        for (std::size_t k = 1; k < steps.size(); ++k)
            if (steps[k].state != steps[k - 1].next_state) return false;
        return true;
    }
};

/// Samples a trajectory of T transitions from the kernel. With a policy the
/// action comes from it (sampled for random policies); without one the
/// behavior is uniform-random exploration. Deterministic given the seed.
inline Trajectory simulate_trajectory(const TabularMdp& mdp, const Kernel& kernel,
                                      const std::optional<PolicyTable>& behavior, int T,
                                      std::uint64_t seed, int start_state = 0) {
    if (T < 1) throw invariant_error("trajectory length must be at least 1");
    if (start_state < 0 || start_state >= mdp.num_states())
        throw dimension_error("start state out of range");
    if (behavior) behavior->check_valid_for(mdp.num_states(), mdp.num_actions());

    detail::Rng rng(seed);
    Trajectory traj;
    traj.steps.reserve(T);
    int s = start_state;
    for (int t = 0; t < T; ++t) {
        int a;
        if (!behavior) {
            a = rng.uniform_int(mdp.num_actions());
        } else if (behavior->is_deterministic()) {
            a = behavior->action(s);
        } else {
            numvec row(mdp.num_actions());
            for (int ai = 0; ai < mdp.num_actions(); ++ai) row[ai] = behavior->action_prob(s, ai);
            a = rng.sample(row);
        }
        const int sp = rng.sample(kernel.row(a, s));
        traj.steps.push_back({s, a, mdp.reward(s, a, sp), sp});
        s = sp;
    }
    return traj;
}

/// A state-relabeling observation attack: every state index in the corrupted
/// trajectory is mapped through one bijection.
struct PermutationAttack {
    indvec perm;
    std::string note;

    void check(int num_states) const {
        if (static_cast<int>(perm.size()) != num_states)
            throw dimension_error("permutation length != state count");
        std::vector<bool> seen(num_states, false);
        for (int p : perm) {
            if (p < 0 || p >= num_states || seen[p])
                throw invariant_error("permutation is not a bijection");
            seen[p] = true;
        }
    }
};

/// Maps every state through the permutation; actions and rewards untouched.
/// Chaining is preserved because both ends of each step map consistently.
inline Trajectory apply_permutation_attack(const Trajectory& traj,
                                           const PermutationAttack& attack) {
    Trajectory out;
    out.steps.reserve(traj.steps.size());
    for (const TransitionStep& step : traj.steps)
        out.steps.push_back(
            {attack.perm[step.state], step.action, step.reward, attack.perm[step.next_state]});
    return out;
}

/// Count-based kernel estimate with additive smoothing. Rows never visited
/// (and with zero smoothing) fall back to uniform so the result is always a
/// valid kernel.
inline Kernel estimate_kernel(const std::vector<Trajectory>& trajectories, int num_states,
                              int num_actions, real_t smoothing = 0.0) {
    if (smoothing < 0.0) throw invariant_error("smoothing must be nonnegative");
    const int S = num_states, A = num_actions;
    std::vector<double> counts(static_cast<std::size_t>(A) * S * S, 0.0);
    for (const Trajectory& traj : trajectories)
        for (const TransitionStep& step : traj.steps)
            counts[(static_cast<std::size_t>(step.action) * S + step.state) * S +
                   step.next_state] += 1.0;

    numvec probs(counts.size(), 0.0);
    for (int a = 0; a < A; ++a)
        for (int s = 0; s < S; ++s) {
            const std::size_t base = (static_cast<std::size_t>(a) * S + s) * S;
            real_t total = 0.0;
            for (int sp = 0; sp < S; ++sp) total += counts[base + sp];
            if (total + smoothing * S <= 0.0) {
                for (int sp = 0; sp < S; ++sp) probs[base + sp] = 1.0 / S;
            } else {
                for (int sp = 0; sp < S; ++sp)
                    probs[base + sp] = (counts[base + sp] + smoothing) / (total + smoothing * S);
            }
        }
    return Kernel(A, S, std::move(probs));
}

/// States where every action self-loops with zero reward; Q-learning treats
/// those as episode terminators (their value is identically zero).
inline std::vector<bool> absorbing_zero_reward_states(const TabularMdp& mdp,
                                                      const Kernel& kernel) {
    std::vector<bool> absorbing(mdp.num_states(), false);
    for (int s = 0; s < mdp.num_states(); ++s) {
        bool all = true;
        for (int a = 0; a < mdp.num_actions() && all; ++a)
            all = kernel.prob(a, s, s) == 1.0 && mdp.reward(s, a, s) == 0.0;
        absorbing[s] = all;
    }
    return absorbing;
}

struct QLearnConfig {
    int episodes = 50'000;
    int max_steps = 100;     ///< episode cap when no absorbing state is hit
    real_t learning_rate = 0.1;
    /// Optional per-pair harmonic decay: the step size for the n-th update of
    /// (s,a) is learning_rate / (1 + lr_decay * n). Zero keeps it constant.
    /// Slip worlds have optimal-action margins of a few 1e-3, below the
    /// stationary noise of a constant step size; the decayed schedule is what
    /// the oracle-grade runs use.
    real_t lr_decay = 0.0;
    real_t eps_start = 1.0;  ///< epsilon-greedy exploration, linear decay
    real_t eps_end = 0.05;
    std::uint64_t seed = 0;

    void validate() const {
        if (episodes < 1 || max_steps < 1) throw invariant_error("episodes/steps must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw invariant_error("learning rate must lie in (0,1]");
        if (lr_decay < 0.0) throw invariant_error("lr_decay must be nonnegative");
        if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
            throw invariant_error("exploration rates must lie in [0,1]");
    }
};

struct QLearnResult {
    Matrix q;
    PolicyTable greedy;
};

/// Standard one-step tabular Q-learning on sampled transitions. Episodes
/// start from a uniformly random non-absorbing state and end on absorption or
/// the step cap. Greedy extraction ties to the lowest action index.
inline QLearnResult tabular_q_learning(const TabularMdp& mdp, const Kernel& kernel,
                                       const QLearnConfig& config) {
    config.validate();
    if (kernel.num_states() != mdp.num_states() || kernel.num_actions() != mdp.num_actions())
        throw dimension_error("kernel shape does not match MDP");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const std::vector<bool> absorbing = absorbing_zero_reward_states(mdp, kernel);
    indvec live;
    for (int s = 0; s < S; ++s)
        if (!absorbing[s]) live.push_back(s);
    if (live.empty()) throw invariant_error("every state is absorbing");

    detail::Rng rng(config.seed);
    Matrix q(S, A);
    Matrix visits(S, A);
    for (int episode = 0; episode < config.episodes; ++episode) {
        const real_t frac =
            config.episodes > 1 ? static_cast<real_t>(episode) / (config.episodes - 1) : 1.0;
        const real_t eps = config.eps_start + frac * (config.eps_end - config.eps_start);
        int s = live[rng.uniform_int(static_cast<int>(live.size()))];
        for (int t = 0; t < config.max_steps && !absorbing[s]; ++t) {
            int a;
            if (rng.uniform() < eps) {
                a = rng.uniform_int(A);
            } else {
                a = 0;
                for (int ai = 1; ai < A; ++ai)
                    if (q(s, ai) > q(s, a)) a = ai;
            }
            const int sp = rng.sample(kernel.row(a, s));
            const real_t r = mdp.reward(s, a, sp);
            real_t best_next = q(sp, 0);
            for (int ai = 1; ai < A; ++ai) best_next = std::max(best_next, q(sp, ai));
            const real_t step =
                config.learning_rate / (1.0 + config.lr_decay * visits(s, a));
            visits(s, a) += 1.0;
            q(s, a) += step * (r + mdp.discount() * best_next - q(s, a));
            s = sp;
        }
    }
    PolicyTable greedy_pol = greedy_policy(q);
    return {std::move(q), std::move(greedy_pol)};
}

/// Sanity oracle for a learned policy: at every non-absorbing state the
/// greedy action must be within `tol` of optimal in the kernel's true
/// Q-values. Bump-equivalent actions tie exactly in the slip worlds, so
/// action-index equality with the planner is not a meaningful target;
/// value equivalence is.
inline bool greedy_matches_planner(const TabularMdp& mdp, const Kernel& kernel,
                                   const PolicyTable& greedy, real_t tol = 0.01) {
    const auto [planner, vstar] = optimal_policy_fixed_kernel(mdp, kernel);
    const Matrix qstar = q_values(mdp, kernel, vstar);
    const auto absorbing = absorbing_zero_reward_states(mdp, kernel);
    for (int s = 0; s < mdp.num_states(); ++s) {
        if (absorbing[s]) continue;
        if (qstar(s, greedy.action(s)) < qstar(s, planner.action(s)) - tol) return false;
    }
    return true;
}

/// Bayes posterior over the ensemble after observing delusional kernel y.
inline BeliefWeights posterior_after_observation(const KernelEnsemble& ensemble,
                                                 const JointChannel& channel, int observed_y) {
    if (channel.prior().size() != ensemble.size())
        throw dimension_error("channel prior length != ensemble size");
    if (observed_y < 0 || observed_y >= channel.num_y())
        throw dimension_error("observation index out of range");
    const auto posterior = channel.posterior(observed_y);
    if (!posterior) throw zero_marginal_error("observation has zero marginal probability");
    return *posterior;
}

/// Index of the ensemble member closest to the kernel in max-abs elementwise
/// distance; ties break to the lowest index.
inline int nearest_ensemble_member(const KernelEnsemble& ensemble, const Kernel& estimate) {
    int best = 0;
    real_t best_d = 0.0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        real_t d = 0.0;
        const numvec& a = ensemble.kernels[i].tensor();
        const numvec& b = estimate.tensor();
        for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
        if (i == 0 || d < best_d - 1e-15) {
            best = static_cast<int>(i);
            best_d = d;
        }
    }
    return best;
}

/// Per-start-state outcome of the model-free rate-distortion experiment.
struct ModelFreeAttackResult {
    indvec states;          ///< the non-absorbing start states, in index order
    numvec attack_regret;   ///< mean over runs of V*_X(s) - V^{victim}_X(s)
    numvec baseline_regret; ///< same, for the reversible deterministic attack
    int runs = 0;
};

/// Model-free victim under the rate-distortion attack. Each run samples the
/// ground truth X from the prior and the observed kernel Y from the channel;
/// the victim Q-learns under Y's dynamics and its greedy policy is then
/// evaluated exactly on X. The baseline victim faces a deterministic attack
/// it can reverse, so it effectively trains on X itself and its regret is
/// pure learning noise.
inline ModelFreeAttackResult run_rate_distortion_model_free(const EnvironmentSpec& env,
                                                            const JointChannel& channel,
                                                            int runs, std::uint64_t seed,
                                                            const QLearnConfig& qlearn) {
    if (runs < 1) throw invariant_error("runs must be >= 1");
    if (channel.prior().size() != env.ensemble.size())
        throw dimension_error("channel prior length != ensemble size");

    const std::vector<bool> absorbing =
        absorbing_zero_reward_states(env.mdp, env.ensemble.kernels.front());
    ModelFreeAttackResult result;
    for (int s = 0; s < env.mdp.num_states(); ++s)
        if (!absorbing[s]) result.states.push_back(s);
    result.attack_regret.assign(result.states.size(), 0.0);
    result.baseline_regret.assign(result.states.size(), 0.0);
    result.runs = runs;

    std::vector<ValueVector> optimal_values;
    for (const Kernel& k : env.ensemble.kernels)
        optimal_values.push_back(optimal_policy_fixed_kernel(env.mdp, k).second);

    detail::Rng rng(seed);
    for (int run = 0; run < runs; ++run) {
        const int x = rng.sample(env.ensemble.prior);
        const int y = rng.sample(
            std::span<const real_t>(channel.likelihood().data().data() +
                                        static_cast<std::size_t>(x) * channel.num_y(),
                                    static_cast<std::size_t>(channel.num_y())));
        QLearnConfig cfg = qlearn;
        cfg.seed = qlearn.seed + 7919ULL * static_cast<std::uint64_t>(run) + 1;
        const PolicyTable attacked = tabular_q_learning(env.mdp, env.ensemble.kernels[y], cfg).greedy;
        cfg.seed += 104729ULL;
        const PolicyTable baseline = tabular_q_learning(env.mdp, env.ensemble.kernels[x], cfg).greedy;

        const ValueVector v_attacked =
            evaluate_policy_exact(env.mdp, env.ensemble.kernels[x], attacked);
        const ValueVector v_baseline =
            evaluate_policy_exact(env.mdp, env.ensemble.kernels[x], baseline);
        for (std::size_t i = 0; i < result.states.size(); ++i) {
            const int s = result.states[i];
            result.attack_regret[i] += (optimal_values[x][s] - v_attacked[s]) / runs;
            result.baseline_regret[i] += (optimal_values[x][s] - v_baseline[s]) / runs;
        }
    }
    return result;
}

struct PermutationExperimentConfig {
    int episodes = 20;
    int steps_per_episode = 100;
    real_t smoothing = 0.0;
    std::uint64_t seed = 0;
};

/// One run of the random state-permutation observation attack.
struct PermutationExperimentResult {
    int true_kernel = 0;
    indvec identified;            ///< per episode: nearest ensemble member
    numvec per_episode_regret;    ///< || V^{pi*(X)}_X - V^{pi*(identified)}_X ||_inf
    real_t zero_information_regret = 0.0; ///< planner regret under the bare prior
};

/// The victim collects one corrupted trajectory per episode (a fresh uniform
/// state permutation each time), estimates the kernel by empirical
/// frequencies, identifies the nearest ensemble member, and plans optimally
/// for it. Because the conjugated estimate is itself (close to) a family
/// member chosen uniformly, the identifications stay uniform and the regret
/// never concentrates away.
inline PermutationExperimentResult
run_permutation_attack_experiment(const EnvironmentSpec& env,
                                  const PermutationExperimentConfig& config) {
    const int S = env.mdp.num_states();
    const std::vector<indvec> perms = all_permutations(S);
    detail::Rng rng(config.seed);

    std::vector<PolicyTable> optima;
    std::vector<ValueVector> optimal_values;
    for (const Kernel& k : env.ensemble.kernels) {
        auto [pol, val] = optimal_policy_fixed_kernel(env.mdp, k);
        optima.push_back(std::move(pol));
        optimal_values.push_back(std::move(val));
    }

    PermutationExperimentResult result;
    result.true_kernel = rng.sample(env.ensemble.prior);
    const Kernel& truth = env.ensemble.kernels[result.true_kernel];

    PlanReport prior_plan = exhaustive_regret_optimal_policy(env.mdp, env.ensemble, env.ensemble.prior);
    result.zero_information_regret = prior_plan.objective;

    for (int episode = 0; episode < config.episodes; ++episode) {
        const PermutationAttack attack{perms[rng.uniform_int(static_cast<int>(perms.size()))],
                                       "episode " + std::to_string(episode)};
        const std::uint64_t traj_seed = config.seed + 6700417ULL * (episode + 1);
        const Trajectory clean = simulate_trajectory(env.mdp, truth, std::nullopt,
                                                     config.steps_per_episode, traj_seed,
                                                     rng.uniform_int(S));
        const Trajectory corrupted = apply_permutation_attack(clean, attack);
        const Kernel estimate =
            estimate_kernel({corrupted}, S, env.mdp.num_actions(), config.smoothing);
        const int identified = nearest_ensemble_member(env.ensemble, estimate);
        result.identified.push_back(identified);

        const ValueVector victim_values =
            evaluate_policy_exact(env.mdp, truth, optima[identified]);
        result.per_episode_regret.push_back(
            linf_distance(optimal_values[result.true_kernel], victim_values));
    }
    return result;
}

} // namespace rdmdp
