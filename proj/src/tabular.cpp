#include "medn/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "medn/errors.hpp"

namespace medn {

void TabularMDP::validate() const {
    if (n_states == 0 || n_actions == 0) {
        throw ContractError("tabular MDP: needs at least one state and one action");
    }
    if (transition.size() != n_states * n_actions * n_states ||
        reward.size() != n_states * n_actions || terminal.size() != n_states) {
        throw DimensionError("tabular MDP: table sizes do not match n_states/n_actions");
    }
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < n_actions; ++a) {
            double total = 0.0;
            for (std::size_t next = 0; next < n_states; ++next) {
                const double prob = p(s, a, next);
                if (!(prob >= 0.0)) {
                    throw ContractError("tabular MDP: negative transition probability");
                }
                total += prob;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw ContractError("tabular MDP: P(.|" + std::to_string(s) + "," +
                                    std::to_string(a) + ") sums to " + std::to_string(total));
            }
            if (!std::isfinite(r(s, a))) {
                throw ContractError("tabular MDP: non-finite reward");
            }
        }
    }
}

namespace {

double backup(const TabularMDP& mdp, const std::vector<double>& values, double gamma,
              std::size_t s, std::size_t a) {
    double expected = 0.0;
    for (std::size_t next = 0; next < mdp.n_states; ++next) {
        expected += mdp.p(s, a, next) * values[next];
    }
    return mdp.r(s, a) + gamma * expected;
}

} // namespace

ValueIterationResult value_iteration(const TabularMDP& mdp, double gamma, double tol,
                                     std::size_t max_sweeps) {
    mdp.validate();
    const bool episodic = std::find(mdp.terminal.begin(), mdp.terminal.end(), true) !=
                          mdp.terminal.end();
    if (!(gamma >= 0.0) || gamma > 1.0 || (gamma == 1.0 && !episodic)) {
        throw ContractError("value_iteration: gamma must lie in [0, 1) (1 only for episodic MDPs), got " +
                            std::to_string(gamma));
    }
    if (!(tol > 0.0)) {
        throw ContractError("value_iteration: tol must be positive");
    }
    ValueIterationResult result;
    std::vector<double> values(mdp.n_states, 0.0);
    std::vector<double> next_values(mdp.n_states, 0.0);
    for (std::size_t sweep = 0;; ++sweep) {
        if (sweep == max_sweeps) {
            throw NumericError("value_iteration: no convergence after " +
                               std::to_string(max_sweeps) + " sweeps");
        }
        double delta = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            if (mdp.terminal[s]) {
                next_values[s] = 0.0;
                continue;
            }
            double best = backup(mdp, values, gamma, s, 0);
            for (std::size_t a = 1; a < mdp.n_actions; ++a) {
                best = std::max(best, backup(mdp, values, gamma, s, a));
            }
            next_values[s] = best;
            delta = std::max(delta, std::abs(best - values[s]));
        }
        values.swap(next_values);
        result.sweep_deltas.push_back(delta);
        if (delta < tol) {
            break;
        }
    }
    result.q = DenseArray({mdp.n_states, mdp.n_actions});
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            result.q.at(s, a) = mdp.terminal[s] ? 0.0 : backup(mdp, values, gamma, s, a);
        }
    }
    result.values = std::move(values);
    return result;
}

std::vector<std::size_t> greedy_policy(const TabularMDP& mdp, const DenseArray& q) {
    if (q.rows() != mdp.n_states || q.cols() != mdp.n_actions) {
        throw DimensionError("greedy_policy: Q table " + shape_string(q.shape()) +
                             " does not match the MDP");
    }
    std::vector<std::size_t> policy(mdp.n_states, 0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        if (mdp.terminal[s]) {
            continue;
        }
        const auto row = q.row(s);
        policy[s] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return policy;
}

double policy_return(const TabularMDP& mdp, const std::vector<std::size_t>& policy,
                     std::size_t start, std::size_t horizon) {
    if (policy.size() != mdp.n_states || start >= mdp.n_states) {
        throw ContractError("policy_return: policy/start do not match the MDP");
    }
    std::vector<double> remaining(mdp.n_states, 0.0);
    std::vector<double> next(mdp.n_states, 0.0);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            next[s] = mdp.terminal[s] ? 0.0 : backup(mdp, remaining, 1.0, s, policy[s]);
        }
        remaining.swap(next);
    }
    return remaining[start];
}

} // namespace medn
