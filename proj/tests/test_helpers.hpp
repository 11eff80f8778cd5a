#pragma once

#include "rdmdp/rdmdp.hpp"

#include <random>

namespace rdmdp::testing {

/// Random row-stochastic kernel: rows drawn from a symmetric Dirichlet via
/// normalized exponentials.
inline Kernel random_kernel(std::mt19937_64& gen, int num_actions, int num_states) {
    std::exponential_distribution<real_t> expo(1.0);
    numvec probs(static_cast<std::size_t>(num_actions) * num_states * num_states);
    for (int a = 0; a < num_actions; ++a)
        for (int s = 0; s < num_states; ++s) {
            real_t total = 0.0;
            const std::size_t base = (static_cast<std::size_t>(a) * num_states + s) * num_states;
            for (int sp = 0; sp < num_states; ++sp) {
                probs[base + sp] = expo(gen) + 1e-6;
                total += probs[base + sp];
            }
            real_t acc = 0.0;
            for (int sp = 0; sp < num_states - 1; ++sp) {
                probs[base + sp] /= total;
                acc += probs[base + sp];
            }
            probs[base + num_states - 1] = 1.0 - acc; // exact row sum
        }
    return Kernel(num_actions, num_states, std::move(probs));
}

inline TabularMdp random_mdp(std::mt19937_64& gen, int num_states, int num_actions,
                             real_t discount = 0.9) {
    std::uniform_real_distribution<real_t> unit(0.0, 1.0);
    numvec reward(static_cast<std::size_t>(num_states) * num_actions * num_states);
    for (real_t& r : reward) r = unit(gen);
    return TabularMdp(num_states, num_actions, std::move(reward), discount);
}

inline PolicyTable random_deterministic_policy(std::mt19937_64& gen, int num_states,
                                               int num_actions) {
    std::uniform_int_distribution<int> act(0, num_actions - 1);
    indvec actions(num_states);
    for (int& a : actions) a = act(gen);
    return PolicyTable::deterministic(std::move(actions));
}

} // namespace rdmdp::testing

namespace rdmdp::testing {

inline numvec random_distribution(std::mt19937_64& gen, int n) {
    std::exponential_distribution<real_t> expo(1.0);
    numvec d(n);
    real_t total = 0.0;
    for (real_t& x : d) {
        x = expo(gen) + 1e-9;
        total += x;
    }
    real_t acc = 0.0;
    for (int i = 0; i < n - 1; ++i) {
        d[i] /= total;
        acc += d[i];
    }
    d[n - 1] = 1.0 - acc;
    return d;
}

inline JointChannel random_channel(std::mt19937_64& gen, int max_size = 5) {
    std::uniform_int_distribution<int> size(2, max_size);
    const int nx = size(gen), ny = size(gen);
    numvec prior = random_distribution(gen, nx);
    Matrix likelihood(nx, ny);
    for (int x = 0; x < nx; ++x) {
        const numvec row = random_distribution(gen, ny);
        for (int y = 0; y < ny; ++y) likelihood(x, y) = row[y];
    }
    return JointChannel(std::move(prior), std::move(likelihood));
}

} // namespace rdmdp::testing
