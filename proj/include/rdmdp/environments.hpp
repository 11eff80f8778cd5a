#pragma once

#include "rdmdp/ensemble.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rdmdp {

/// A named MDP instance together with its kernel ensemble and prior.
struct EnvironmentSpec {
    std::string name;
    TabularMdp mdp;
    KernelEnsemble ensemble;
    std::string notes;
};

namespace detail {

/// Broadcasts a reward that only depends on (s, s') over the action axis.
inline numvec broadcast_reward_ss(const Matrix& r_ss, int num_actions) {
    const int S = r_ss.rows();
    numvec out(static_cast<std::size_t>(S) * num_actions * S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < num_actions; ++a)
            for (int sp = 0; sp < S; ++sp)
                out[(static_cast<std::size_t>(s) * num_actions + a) * S + sp] = r_ss(s, sp);
    return out;
}

/// Broadcasts a reward that only depends on (s, a) over the successor axis.
inline numvec broadcast_reward_sa(const Matrix& r_sa, int num_states) {
    const int S = num_states;
    const int A = r_sa.cols();
    numvec out(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int sp = 0; sp < S; ++sp)
                out[(static_cast<std::size_t>(s) * A + a) * S + sp] = r_sa(s, a);
    return out;
}

/// Deterministic cyclic shift kernel row: from s to (s + shift) mod S.
inline void fill_cycle(numvec& probs, int a, int S, int shift) {
    for (int s = 0; s < S; ++s) {
        const int sp = ((s + shift) % S + S) % S;
        probs[(static_cast<std::size_t>(a) * S + s) * S + sp] = 1.0;
    }
}

} // namespace detail

/// The two-state, two-action counterexample to the existence of a policy that
/// maximizes the expected value at every state simultaneously. Action 0 ("a")
/// swaps the states under X1 and holds under X2; action 1 ("b") is the
/// opposite. Uniform prior, gamma = 0.9.
inline EnvironmentSpec two_state_env() {
    const int S = 2, A = 2;
    numvec x1(static_cast<std::size_t>(A) * S * S, 0.0), x2 = x1;
    detail::fill_cycle(x1, 0, S, 1); // a: swap
    detail::fill_cycle(x1, 1, S, 0); // b: identity
    detail::fill_cycle(x2, 0, S, 0); // a: identity
    detail::fill_cycle(x2, 1, S, 1); // b: swap
    Matrix r_ss(2, 2, {0.06, 0.15, 0.3, 0.95});
    TabularMdp mdp(S, A, detail::broadcast_reward_ss(r_ss, A), 0.9);
    KernelEnsemble ensemble({Kernel(A, S, std::move(x1)), Kernel(A, S, std::move(x2))},
                            {0.5, 0.5});
    return {"two_state", std::move(mdp), std::move(ensemble),
            "two permutation kernels, reward on (s,s'), uniform prior"};
}

/// Three states on a circle with actions {left, right, stay}. X2's action
/// kernels are the cyclic relabeling of X1's: X2^left = X1^right,
/// X2^right = X1^stay, X2^stay = X1^left. Uniform prior, gamma = 0.9.
inline EnvironmentSpec three_state_cycle_env() {
    const int S = 3, A = 3;
    numvec x1(static_cast<std::size_t>(A) * S * S, 0.0), x2 = x1;
    detail::fill_cycle(x1, 0, S, -1); // left
    detail::fill_cycle(x1, 1, S, +1); // right
    detail::fill_cycle(x1, 2, S, 0);  // stay
    detail::fill_cycle(x2, 0, S, +1); // left  = X1 right
    detail::fill_cycle(x2, 1, S, 0);  // right = X1 stay
    detail::fill_cycle(x2, 2, S, -1); // stay  = X1 left
    Matrix r_ss(3, 3, {0.06, 0.1, 0.15, 0.02, 0.1, 0.15, 0.01, 0.2, 0.95});
    TabularMdp mdp(S, A, detail::broadcast_reward_ss(r_ss, A), 0.9);
    KernelEnsemble ensemble({Kernel(A, S, std::move(x1)), Kernel(A, S, std::move(x2))},
                            {0.5, 0.5});
    return {"three_state_cycle", std::move(mdp), std::move(ensemble),
            "cyclic kernels, X2 is the action permutation of X1, uniform prior"};
}

/// Grid world layout. Cells are (row, col) with row-major indexing from the
/// top-left; the wall and terminal coordinates are configuration, defaulting
/// to the classic 3x4 layout (wall at (1,1), +1 at (0,3), -1 at (1,3)).
struct GridWorldSpec {
    int width = 4;
    int height = 3;
    std::set<std::pair<int, int>> walls = {{1, 1}};
    std::map<std::pair<int, int>, real_t> terminals = {{{0, 3}, 1.0}, {{1, 3}, -1.0}};
    real_t step_penalty = -0.04;
    real_t discount = 0.9;

    int num_states() const { return width * height; }
    int index(int row, int col) const { return row * width + col; }
    bool is_wall(int row, int col) const { return walls.count({row, col}) > 0; }
    bool is_terminal(int row, int col) const { return terminals.count({row, col}) > 0; }

    void validate() const {
        if (width <= 0 || height <= 0) throw invariant_error("grid dimensions must be positive");
        for (const auto& w : walls)
            if (terminals.count(w)) throw invariant_error("wall and terminal cells must be disjoint");
    }
};

/// Action order of the grid world: east, west, north, south.
enum class GridAction { east = 0, west = 1, north = 2, south = 3 };
inline constexpr int grid_num_actions = 4;

namespace detail {

inline std::pair<int, int> grid_delta(int action) {
    switch (action) {
    case 0: return {0, 1};   // east
    case 1: return {0, -1};  // west
    case 2: return {-1, 0};  // north
    default: return {1, 0};  // south
    }
}

inline std::pair<int, int> grid_orthogonal(int action) {
    // east/west slip north or south; north/south slip east or west
    return action <= 1 ? std::pair<int, int>{2, 3} : std::pair<int, int>{0, 1};
}

} // namespace detail

/// Builds the slip-model kernel for the grid world: the intended direction
/// succeeds with probability alpha and each orthogonal direction happens with
/// probability (1-alpha)/2. Moves into walls or off the grid stay put.
/// Terminal and wall states self-loop.
inline Kernel grid_world_kernel(const GridWorldSpec& spec, real_t alpha) {
    spec.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw invariant_error("slip alpha must lie in [0,1]");
    const int S = spec.num_states();
    numvec probs(static_cast<std::size_t>(grid_num_actions) * S * S, 0.0);
    auto at = [&](int a, int s, int sp) -> real_t& {
        return probs[(static_cast<std::size_t>(a) * S + s) * S + sp];
    };
    for (int row = 0; row < spec.height; ++row)
        for (int col = 0; col < spec.width; ++col) {
            const int s = spec.index(row, col);
            if (spec.is_wall(row, col) || spec.is_terminal(row, col)) {
                for (int a = 0; a < grid_num_actions; ++a) at(a, s, s) = 1.0;
                continue;
            }
            for (int a = 0; a < grid_num_actions; ++a) {
                const auto [o1, o2] = detail::grid_orthogonal(a);
                const std::pair<int, real_t> moves[] = {
                    {a, alpha}, {o1, (1.0 - alpha) / 2.0}, {o2, (1.0 - alpha) / 2.0}};
                for (const auto& [dir, p] : moves) {
                    auto [dr, dc] = detail::grid_delta(dir);
                    int nr = row + dr, nc = col + dc;
                    if (nr < 0 || nr >= spec.height || nc < 0 || nc >= spec.width ||
                        spec.is_wall(nr, nc)) {
                        nr = row;
                        nc = col;
                    }
                    at(a, s, spec.index(nr, nc)) += p;
                }
            }
        }
    return Kernel(grid_num_actions, S, std::move(probs));
}

/// Reward tensor of the grid world: entering a terminal pays its reward,
/// every other transition from a live cell pays the step penalty, and
/// absorbing states pay nothing. Note the step penalty makes rewards leave
/// the [0,1] range of the bounded-reward environments; that is intentional.
inline numvec grid_world_reward(const GridWorldSpec& spec) {
    const int S = spec.num_states();
    numvec reward(static_cast<std::size_t>(S) * grid_num_actions * S, 0.0);
    auto at = [&](int s, int a, int sp) -> real_t& {
        return reward[(static_cast<std::size_t>(s) * grid_num_actions + a) * S + sp];
    };
    for (int row = 0; row < spec.height; ++row)
        for (int col = 0; col < spec.width; ++col) {
            const int s = spec.index(row, col);
            if (spec.is_wall(row, col) || spec.is_terminal(row, col)) continue;
            for (int a = 0; a < grid_num_actions; ++a)
                for (int tr = 0; tr < spec.height; ++tr)
                    for (int tc = 0; tc < spec.width; ++tc) {
                        const auto it = spec.terminals.find({tr, tc});
                        at(s, a, spec.index(tr, tc)) =
                            it != spec.terminals.end() ? it->second : spec.step_penalty;
                    }
        }
    return reward;
}

/// Single-kernel block world at the given slip probability.
inline EnvironmentSpec block_world_env(real_t alpha, const GridWorldSpec& spec = GridWorldSpec{}) {
    TabularMdp mdp(spec.num_states(), grid_num_actions, grid_world_reward(spec), spec.discount);
    KernelEnsemble ensemble({grid_world_kernel(spec, alpha)}, {1.0});
    return {"block_world", std::move(mdp), std::move(ensemble),
            "3x4 grid, slip alpha=" + std::to_string(alpha)};
}

/// Block world with one kernel per slip probability and the given prior.
inline EnvironmentSpec block_world_ensemble(const numvec& alphas, const numvec& prior,
                                            const GridWorldSpec& spec = GridWorldSpec{}) {
    if (alphas.empty() || alphas.size() != prior.size())
        throw dimension_error("block_world_ensemble: alphas/prior size mismatch");
    std::vector<Kernel> kernels;
    kernels.reserve(alphas.size());
    for (real_t a : alphas) kernels.push_back(grid_world_kernel(spec, a));
    TabularMdp mdp(spec.num_states(), grid_num_actions, grid_world_reward(spec), spec.discount);
    return {"block_world_ensemble", std::move(mdp), KernelEnsemble(std::move(kernels), prior),
            "3x4 grid, random slip probability"};
}

/// All permutations of {0..n-1} in lexicographic order (the identity first).
inline std::vector<indvec> all_permutations(int n) {
    indvec perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::vector<indvec> out;
    do {
        out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

/// Conjugates every action matrix by the state permutation:
/// out(a, perm[s], perm[s']) = in(a, s, s').
inline Kernel conjugate_kernel(const Kernel& kernel, const indvec& perm) {
    const int S = kernel.num_states();
    const int A = kernel.num_actions();
    if (static_cast<int>(perm.size()) != S)
        throw dimension_error("permutation length != state count");
    numvec probs(static_cast<std::size_t>(A) * S * S, 0.0);
    for (int a = 0; a < A; ++a)
        for (int s = 0; s < S; ++s)
            for (int sp = 0; sp < S; ++sp)
                probs[(static_cast<std::size_t>(a) * S + perm[s]) * S + perm[sp]] =
                    kernel.prob(a, s, sp);
    return Kernel(A, S, std::move(probs));
}

/// Six-kernel family generated by conjugating a base three-state kernel with
/// every state permutation; uniform prior. Reward depends on (s, a) only.
inline EnvironmentSpec permutation_family_env() {
    const int S = 3, A = 3;
    // action order: left, right, stay
    numvec base{
        1.0, 0.0, 0.0, 0.8, 0.2, 0.0, 0.0, 0.8, 0.2, // left
        0.2, 0.8, 0.0, 0.0, 0.2, 0.8, 0.0, 0.0, 1.0, // right
        0.9, 0.1, 0.0, 0.1, 0.8, 0.1, 0.0, 0.1, 0.9, // stay
    };
    Kernel x1(A, S, std::move(base));
    std::vector<Kernel> kernels;
    for (const indvec& perm : all_permutations(S)) kernels.push_back(conjugate_kernel(x1, perm));
    Matrix r_sa(3, 3, {1.0, 1.3, 1.1, 2.0, 2.3, 2.1, 3.0, 3.3, 3.1});
    TabularMdp mdp(S, A, detail::broadcast_reward_sa(r_sa, S), 0.9);
    const std::size_t n = kernels.size();
    KernelEnsemble ensemble(std::move(kernels), numvec(n, 1.0 / static_cast<real_t>(n)));
    return {"permutation_family", std::move(mdp), std::move(ensemble),
            "six state-permutation conjugates of one base kernel, reward on (s,a)"};
}

/// Looks up a paper environment by its registry name.
inline EnvironmentSpec environment_by_name(const std::string& name) {
    if (name == "two_state") return two_state_env();
    if (name == "three_state_cycle") return three_state_cycle_env();
    if (name == "block_world") return block_world_ensemble({0.8, 0.2}, {0.5, 0.5});
    if (name == "permutation_family") return permutation_family_env();
    throw invariant_error("unknown environment: " + name);
}

} // namespace rdmdp
