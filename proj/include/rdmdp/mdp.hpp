#pragma once

#include "rdmdp/core.hpp"
#include "rdmdp/linalg.hpp"

#include <optional>
#include <span>
#include <utility>

namespace rdmdp {

/// Finite tabular MDP: state/action counts, reward tensor r(s,a,s') and a
/// discount strictly below 1 (so policy evaluation is a nonsingular solve).
///
/// The reward is always stored as a full (s,a,s') tensor; environments whose
/// reward depends only on (s,s') or (s,a) broadcast into this canonical form.
class TabularMdp {
public:
    TabularMdp(int num_states, int num_actions, numvec reward, real_t discount)
        : num_states_(num_states), num_actions_(num_actions), reward_(std::move(reward)),
          discount_(discount) {
        if (num_states <= 0 || num_actions <= 0)
            throw invariant_error("TabularMdp: state and action counts must be positive");
        const auto expected =
            static_cast<std::size_t>(num_states) * num_actions * num_states;
        if (reward_.size() != expected)
            throw dimension_error("TabularMdp: reward tensor has wrong size");
        if (!all_finite(reward_)) throw invariant_error("TabularMdp: non-finite reward");
        if (!(discount >= 0.0 && discount < 1.0))
            throw invariant_error("TabularMdp: discount must lie in [0,1)");
    }

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    real_t discount() const { return discount_; }

    real_t reward(int s, int a, int sp) const {
        return reward_[(static_cast<std::size_t>(s) * num_actions_ + a) * num_states_ + sp];
    }
    std::span<const real_t> reward_row(int s, int a) const {
        return {reward_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }
    const numvec& reward_tensor() const { return reward_; }

    /// True when every reward entry lies in [0,1] (the default assumption for
    /// the bounded-reward environments; grid worlds with negative penalties
    /// legitimately return false).
    bool rewards_within_unit_range() const {
        for (real_t r : reward_)
            if (r < 0.0 || r > 1.0) return false;
        return true;
    }

private:
    int num_states_;
    int num_actions_;
    numvec reward_; // (s,a,s')
    real_t discount_;
};

/// One realization of the transition kernel: row-stochastic X(s'|s,a),
/// stored as an (a,s,s') tensor.
class Kernel {
public:
    Kernel(int num_actions, int num_states, numvec probs)
        : num_actions_(num_actions), num_states_(num_states), probs_(std::move(probs)) {
        const auto expected =
            static_cast<std::size_t>(num_actions) * num_states * num_states;
        if (probs_.size() != expected) throw dimension_error("Kernel: tensor has wrong size");
        for (int a = 0; a < num_actions; ++a)
            for (int s = 0; s < num_states; ++s) {
                real_t sum = 0.0;
                for (int sp = 0; sp < num_states; ++sp) {
                    const real_t p = prob(a, s, sp);
                    if (!(p >= 0.0)) throw invariant_error("Kernel: negative probability");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-12)
                    throw invariant_error("Kernel: row (a=" + std::to_string(a) +
                                          ", s=" + std::to_string(s) + ") sums to " +
                                          std::to_string(sum));
            }
    }

    int num_actions() const { return num_actions_; }
    int num_states() const { return num_states_; }

    real_t prob(int a, int s, int sp) const {
        return probs_[(static_cast<std::size_t>(a) * num_states_ + s) * num_states_ + sp];
    }
    std::span<const real_t> row(int a, int s) const {
        return {probs_.data() + (static_cast<std::size_t>(a) * num_states_ + s) * num_states_,
                static_cast<std::size_t>(num_states_)};
    }
    const numvec& tensor() const { return probs_; }

    bool operator==(const Kernel&) const = default;

private:
    int num_actions_;
    int num_states_;
    numvec probs_; // (a,s,s')
};

/// Deterministic (state -> action) or random (state -> distribution over
/// actions) policy.
class PolicyTable {
public:
    enum class Kind { deterministic, random };

    static PolicyTable deterministic(indvec actions) {
        PolicyTable p;
        p.kind_ = Kind::deterministic;
        p.det_ = std::move(actions);
        return p;
    }

    static PolicyTable random(Matrix probs) {
        PolicyTable p;
        p.kind_ = Kind::random;
        for (int s = 0; s < probs.rows(); ++s) {
            real_t sum = 0.0;
            for (int a = 0; a < probs.cols(); ++a) {
                if (!(probs(s, a) >= 0.0))
                    throw invariant_error("PolicyTable: negative action probability");
                sum += probs(s, a);
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw invariant_error("PolicyTable: action probabilities do not sum to 1");
        }
        p.probs_ = std::move(probs);
        return p;
    }

    Kind kind() const { return kind_; }
    bool is_deterministic() const { return kind_ == Kind::deterministic; }

    int num_states() const {
        return is_deterministic() ? static_cast<int>(det_.size()) : probs_.rows();
    }

    int action(int s) const { return det_[s]; }
    const indvec& actions() const { return det_; }

    real_t action_prob(int s, int a) const {
        if (is_deterministic()) return det_[s] == a ? 1.0 : 0.0;
        return probs_(s, a);
    }
    const Matrix& probs() const { return probs_; }

    void check_valid_for(int num_states, int num_actions) const {
        if (this->num_states() != num_states)
            throw dimension_error("policy covers wrong number of states");
        if (is_deterministic()) {
            for (int a : det_)
                if (a < 0 || a >= num_actions)
                    throw dimension_error("policy maps to invalid action index");
        } else if (probs_.cols() != num_actions) {
            throw dimension_error("policy row width does not match action count");
        }
    }

    bool operator==(const PolicyTable& other) const {
        if (kind_ != other.kind_) return false;
        return is_deterministic() ? det_ == other.det_ : probs_ == other.probs_;
    }

private:
    Kind kind_ = Kind::deterministic;
    indvec det_;
    Matrix probs_;
};

using ValueVector = numvec;

namespace detail {

inline void check_shapes(const TabularMdp& mdp, const Kernel& kernel,
                         const PolicyTable& policy) {
    if (kernel.num_states() != mdp.num_states() || kernel.num_actions() != mdp.num_actions())
        throw dimension_error("kernel shape does not match MDP");
    policy.check_valid_for(mdp.num_states(), mdp.num_actions());
}

/// Induced chain P^pi(s'|s) and one-step reward rbar^pi(s) under the policy.
/// Random policies mix kernel rows and rewards over pi(a|s).
inline std::pair<Matrix, numvec> induced_chain(const TabularMdp& mdp, const Kernel& kernel,
                                               const PolicyTable& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    Matrix p(S, S);
    numvec rbar(S, 0.0);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const real_t w = policy.action_prob(s, a);
            if (w == 0.0) continue;
            const auto row = kernel.row(a, s);
            const auto rrow = mdp.reward_row(s, a);
            for (int sp = 0; sp < S; ++sp) {
                p(s, sp) += w * row[sp];
                rbar[s] += w * row[sp] * rrow[sp];
            }
        }
    }
    return {std::move(p), std::move(rbar)};
}

} // namespace detail

/// Exact policy evaluation: the unique fixed point of the Bellman evaluation
/// operator, V = (I - gamma P^pi)^{-1} rbar^pi, by dense LU. The systems are
/// small (a few dozen states at most), so exactness beats scalability here.
inline ValueVector evaluate_policy_exact(const TabularMdp& mdp, const Kernel& kernel,
                                         const PolicyTable& policy) {
    detail::check_shapes(mdp, kernel, policy);
    const int S = mdp.num_states();
    auto [p, rbar] = detail::induced_chain(mdp, kernel, policy);
    Matrix system(S, S);
    for (int s = 0; s < S; ++s)
        for (int sp = 0; sp < S; ++sp)
            system(s, sp) = (s == sp ? 1.0 : 0.0) - mdp.discount() * p(s, sp);
    return detail::solve_dense(std::move(system), std::move(rbar));
}

inline constexpr long default_sweep_cap = 1'000'000;

/// Iterative policy evaluation: in-place Gauss-Seidel sweeps in ascending
/// state order starting from V = 0, stopping when the sup-norm sweep change
/// drops below `threshold`. Agrees with the exact solve within
/// threshold/(1-gamma) in sup-norm.
inline ValueVector evaluate_policy_iterative(const TabularMdp& mdp, const Kernel& kernel,
                                             const PolicyTable& policy, real_t threshold,
                                             long max_sweeps = default_sweep_cap) {
    detail::check_shapes(mdp, kernel, policy);
    if (!(threshold > 0.0)) throw invariant_error("threshold must be positive");
    const int S = mdp.num_states();
    auto [p, rbar] = detail::induced_chain(mdp, kernel, policy);
    numvec v(S, 0.0);
    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        real_t delta = 0.0;
        for (int s = 0; s < S; ++s) {
            real_t acc = rbar[s];
            for (int sp = 0; sp < S; ++sp) acc += mdp.discount() * p(s, sp) * v[sp];
            delta = std::max(delta, std::abs(v[s] - acc));
            v[s] = acc;
        }
        if (delta < threshold) return v;
    }
    throw convergence_error("evaluate_policy_iterative: sweep cap exceeded");
}

/// Q(s,a) = sum_s' X(s'|s,a) [ r(s,a,s') + gamma * v(s') ], as an (s,a) matrix.
inline Matrix q_values(const TabularMdp& mdp, const Kernel& kernel, const ValueVector& values) {
    if (kernel.num_states() != mdp.num_states() || kernel.num_actions() != mdp.num_actions())
        throw dimension_error("kernel shape does not match MDP");
    if (static_cast<int>(values.size()) != mdp.num_states())
        throw dimension_error("value vector has wrong length");
    if (!all_finite(values)) throw invariant_error("q_values: non-finite values");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    Matrix q(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const auto row = kernel.row(a, s);
            const auto rrow = mdp.reward_row(s, a);
            real_t acc = 0.0;
            for (int sp = 0; sp < S; ++sp)
                acc += row[sp] * (rrow[sp] + mdp.discount() * values[sp]);
            q(s, a) = acc;
        }
    return q;
}

/// Greedy policy from a Q-table; argmax ties break to the lowest action index
/// everywhere, so results are reproducible.
inline PolicyTable greedy_policy(const Matrix& q) {
    indvec actions(q.rows());
    for (int s = 0; s < q.rows(); ++s) {
        int best = 0;
        for (int a = 1; a < q.cols(); ++a)
            if (q(s, a) > q(s, best)) best = a;
        actions[s] = best;
    }
    return PolicyTable::deterministic(std::move(actions));
}

/// Policy iteration on a single fixed kernel. Returns the deterministic
/// optimal policy (maximizing V at every state simultaneously; such a policy
/// always exists for a fixed kernel) and its value vector.
inline std::pair<PolicyTable, ValueVector> optimal_policy_fixed_kernel(const TabularMdp& mdp,
                                                                       const Kernel& kernel) {
    PolicyTable policy = PolicyTable::deterministic(indvec(mdp.num_states(), 0));
    for (;;) {
        ValueVector v = evaluate_policy_exact(mdp, kernel, policy);
        PolicyTable improved = greedy_policy(q_values(mdp, kernel, v));
        if (improved == policy) return {std::move(policy), std::move(v)};
        policy = std::move(improved);
    }
}

} // namespace rdmdp
