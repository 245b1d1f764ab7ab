#pragma once

#include <cstddef>
#include <vector>

#include "medn/array.hpp"

namespace medn {

// Finite MDP with explicit dynamics. Terminal states are absorbing and
// contribute no further reward.
struct TabularMDP {
    std::size_t n_states = 0;
    std::size_t n_actions = 0;
    // P(s' | s, a) at [(s * n_actions + a) * n_states + s'].
    std::vector<double> transition;
    // r(s, a) at [s * n_actions + a].
    std::vector<double> reward;
    std::vector<bool> terminal;

    double p(std::size_t s, std::size_t a, std::size_t next) const {
        return transition[(s * n_actions + a) * n_states + next];
    }
    double r(std::size_t s, std::size_t a) const { return reward[s * n_actions + a]; }

    void validate() const;
};

struct ValueIterationResult {
    std::vector<double> values;  // V*(s)
    DenseArray q;                // Q*(s, a), shape {n_states, n_actions}
    // Sup-norm change of V in each sweep.
    std::vector<double> sweep_deltas;
};

// Iterates V <- max_a [r + gamma * sum P V] until the sup-norm change drops
// below tol, then derives Q* with one more backup. gamma must lie in [0, 1);
// gamma = 1 is accepted only when the MDP has terminal states.
ValueIterationResult value_iteration(const TabularMDP& mdp, double gamma, double tol,
                                     std::size_t max_sweeps = 1'000'000);

// Greedy policy of Q* (lowest index on ties); terminal states map to 0.
std::vector<std::size_t> greedy_policy(const TabularMDP& mdp, const DenseArray& q);

// Expected undiscounted return of a deterministic policy from `start` over at
// most `horizon` steps.
double policy_return(const TabularMDP& mdp, const std::vector<std::size_t>& policy,
                     std::size_t start, std::size_t horizon);

} // namespace medn
