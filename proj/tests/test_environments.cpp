#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "medn/environment.hpp"
#include "medn/errors.hpp"
#include "medn/tabular.hpp"

using namespace medn;

namespace {

const std::filesystem::path kData = MEDN_TEST_DATA_DIR;

EpisodeTrace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("missing golden file " + path.string());
    }
    return read_trace(in);
}

// Compares against a golden file; MEDN_UPDATE_GOLDEN=1 rewrites it instead.
void expect_golden(const EpisodeTrace& trace, const std::filesystem::path& path) {
    if (std::getenv("MEDN_UPDATE_GOLDEN") != nullptr) {
        std::ofstream out(path);
        write_trace(out, trace);
        return;
    }
    EXPECT_EQ(trace, load_trace(path)) << path;
}

Policy scripted(std::vector<std::size_t> actions) {
    auto index = std::make_shared<std::size_t>(0);
    return [actions = std::move(actions), index](const Observation&) {
        return actions[(*index)++ % actions.size()];
    };
}

// Deterministic model check: every reachable state/action pair of the
// environment agrees with its tabular model.
void expect_model_matches(const std::function<std::unique_ptr<Environment>()>& make) {
    const auto env0 = make();
    const TabularMDP mdp = *env0->tabular();
    mdp.validate();
    std::map<std::size_t, std::vector<std::size_t>> paths;
    std::deque<std::size_t> frontier;
    env0->reset(0);
    paths[env0->state_index()] = {};
    frontier.push_back(env0->state_index());
    while (!frontier.empty()) {
        const std::size_t s = frontier.front();
        frontier.pop_front();
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            auto env = make();
            env->reset(0);
            for (std::size_t step : paths[s]) {
                env->step(step);
            }
            const StepResult r = env->step(a);
            const std::size_t next = env->state_index();
            EXPECT_EQ(mdp.p(s, a, next), 1.0) << "s=" << s << " a=" << a;
            EXPECT_EQ(mdp.r(s, a), r.reward) << "s=" << s << " a=" << a;
            EXPECT_EQ(mdp.terminal[next], r.terminal);
            if (!r.terminal && !paths.contains(next)) {
                paths[next] = paths[s];
                paths[next].push_back(a);
                frontier.push_back(next);
            }
        }
    }
}

TabularMDP random_mdp(std::size_t states, std::size_t actions, Rng& rng) {
    TabularMDP mdp;
    mdp.n_states = states;
    mdp.n_actions = actions;
    mdp.terminal.assign(states, false);
    for (std::size_t sa = 0; sa < states * actions; ++sa) {
        double total = 0.0;
        std::vector<double> row(states);
        for (double& p : row) {
            p = rng.uniform(0.0, 1.0);
            total += p;
        }
        for (double p : row) {
            mdp.transition.push_back(p / total);
        }
        mdp.reward.push_back(rng.uniform(-1.0, 1.0));
    }
    return mdp;
}

// V^pi by repeated application of the policy backup.
std::vector<double> evaluate_policy(const TabularMDP& mdp, const std::vector<std::size_t>& pi,
                                    double gamma) {
    std::vector<double> v(mdp.n_states, 0.0);
    for (int it = 0; it < 5000; ++it) {
        std::vector<double> next(mdp.n_states, 0.0);
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            next[s] = mdp.r(s, pi[s]);
            for (std::size_t t = 0; t < mdp.n_states; ++t) {
                next[s] += gamma * mdp.p(s, pi[s], t) * v[t];
            }
        }
        v = next;
    }
    return v;
}

} // namespace

TEST(Environment, RegistryListsBundledEnvironments) {
    const auto names = registered_environments();
    EXPECT_EQ(names, (std::vector<std::string>{"ChainMDP", "CorridorDodge", "GridWorld"}));
    for (const auto& name : names) {
        EXPECT_EQ(make_environment(name)->name(), name);
    }
    try {
        make_environment("Pong");
        FAIL();
    } catch (const ContractError& e) {
        EXPECT_NE(std::string(e.what()).find("GridWorld"), std::string::npos);
    }
}

TEST(Environment, StepContract) {
    ChainMDP env;
    EXPECT_THROW(env.step(1), ContractError);
    env.reset(0);
    EXPECT_THROW(env.step(2), ContractError);
    for (int i = 0; i < 4; ++i) {
        env.step(1);
    }
    EXPECT_THROW(env.step(1), ContractError);
    EXPECT_NO_THROW(env.reset(0));
}

TEST(Environment, TruncationIsNotTermination) {
    ChainMDP env;
    env.reset(0);
    StepResult r;
    for (std::size_t i = 0; i < env.spec().max_episode_steps; ++i) {
        ASSERT_FALSE(r.done());
        r = env.step(0);
    }
    EXPECT_TRUE(r.truncated);
    EXPECT_FALSE(r.terminal);
    EXPECT_EQ(env.steps_taken(), env.spec().max_episode_steps);
}

TEST(ChainMDP, HandWrittenGoldenTrace) {
    ChainMDP env;
    const EpisodeTrace trace = record_episode(env, 0, scripted({1, 0, 0, 1, 1, 1, 1}));
    EXPECT_EQ(trace, load_trace(kData / "chain_golden.trace"));
}

TEST(ChainMDP, ModelMatchesSimulation) {
    expect_model_matches([] { return std::make_unique<ChainMDP>(); });
    expect_model_matches([] { return std::make_unique<ChainMDP>(9, -0.2, 3.0, 30); });
}

TEST(ChainMDP, ValueIterationClosedForm) {
    // d steps to the goal: (d - 1) step penalties, then the goal reward.
    for (double gamma : {0.5, 0.9, 0.99}) {
        for (double penalty : {0.0, -0.01}) {
            const ChainMDP env(5, penalty, 1.0);
            const auto vi = value_iteration(*env.tabular(), gamma, 1e-13);
            for (std::size_t s = 0; s < 4; ++s) {
                const double d = static_cast<double>(4 - s);
                const double expected =
                    penalty * (1.0 - std::pow(gamma, d - 1.0)) / (1.0 - gamma) + std::pow(gamma, d - 1.0);
                EXPECT_NEAR(vi.values[s], expected, 1e-10) << "gamma=" << gamma << " s=" << s;
            }
            EXPECT_EQ(vi.values[4], 0.0);
            const auto pi = greedy_policy(*env.tabular(), vi.q);
            for (std::size_t s = 0; s < 4; ++s) {
                EXPECT_EQ(pi[s], 1u);
            }
        }
    }
}

TEST(ChainMDP, OptimalReturn) {
    const ChainMDP env;
    const TabularMDP mdp = *env.tabular();
    const auto pi = greedy_policy(mdp, value_iteration(mdp, 0.99, 1e-12).q);
    EXPECT_NEAR(policy_return(mdp, pi, 0, 20), 0.97, 1e-12);
    // Always-left never reaches the goal.
    EXPECT_NEAR(policy_return(mdp, std::vector<std::size_t>(5, 0), 0, 20), -0.2, 1e-12);
}

TEST(GridWorld, ModelMatchesSimulation) {
    expect_model_matches([] { return std::make_unique<GridWorld>(); });
    expect_model_matches([] {
        return std::make_unique<GridWorld>(std::vector<std::string>{"S..#G", ".P...", "....."});
    });
}

TEST(GridWorld, OracleReturnMatchesShortestPath) {
    // Shortest safe path from S to G in the default layout has 6 moves.
    const GridWorld env;
    const TabularMDP mdp = *env.tabular();
    const auto pi = greedy_policy(mdp, value_iteration(mdp, 0.99, 1e-12).q);
    EXPECT_NEAR(policy_return(mdp, pi, 0, 50), 5 * -0.01 + 1.0, 1e-12);
}

TEST(GridWorld, WallsAndEdgesBlockMoves) {
    GridWorld env;
    env.reset(0);
    EXPECT_EQ(env.step(0).reward, GridWorld::step_reward);  // up off the grid
    EXPECT_EQ(env.state_index(), 0u);
    env.step(3);  // left off the grid
    EXPECT_EQ(env.state_index(), 0u);
    env.step(1);  // (0,1)
    env.step(2);  // wall at (1,1)
    EXPECT_EQ(env.state_index(), 1u);
}

TEST(GridWorld, PitTerminatesWithPenalty) {
    GridWorld env;
    const EpisodeTrace t = record_episode(env, 0, scripted({1, 1, 1, 2}));
    ASSERT_EQ(t.steps.size(), 4u);
    EXPECT_EQ(t.steps.back().reward, GridWorld::pit_reward);
    EXPECT_TRUE(t.steps.back().terminal);
}

TEST(GridWorld, RejectsBadLayouts) {
    EXPECT_THROW(GridWorld(std::vector<std::string>{}), ContractError);
    EXPECT_THROW(GridWorld({"S.", "..."}), ContractError);
    EXPECT_THROW(GridWorld({"..", ".G"}), ContractError);
    EXPECT_THROW(GridWorld({"S?", ".G"}), ContractError);
}

TEST(CorridorDodge, ObservationLayout) {
    CorridorDodge env;
    const Observation obs = env.reset(5);
    ASSERT_EQ(obs.size(), 12u);
    EXPECT_EQ(obs[0], 0.0);
    EXPECT_EQ(obs[1], 1.0);
    EXPECT_EQ(obs[2], 0.0);
    for (std::size_t r = 0; r < 3; ++r) {
        const int lane = env.obstacle_rows()[r];
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_EQ(obs[3 + 3 * r + c], lane == static_cast<int>(c) ? 1.0 : 0.0);
        }
    }
}

TEST(CorridorDodge, OraclePolicyNeverCollides) {
    CorridorDodge env;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const EpisodeTrace t = record_episode(env, seed, CorridorDodge::oracle_action);
        double total = 0.0;
        for (const auto& s : t.steps) {
            total += s.reward;
        }
        EXPECT_EQ(total, env.oracle_return()) << "seed " << seed;
    }
}

TEST(CorridorDodge, StandingStillEventuallyCollides) {
    CorridorDodge env(3, 1.0, 200);
    const EpisodeTrace t = record_episode(env, 1, scripted({1}));
    EXPECT_TRUE(t.steps.back().terminal);
    EXPECT_EQ(t.steps.back().reward, 0.0);
}

TEST(CorridorDodge, EpisodesArePureFunctionsOfSeedAndActions) {
    CorridorDodge a;
    CorridorDodge b;
    const auto ta = record_episode(a, 42, CorridorDodge::oracle_action);
    record_episode(b, 7, scripted({0, 2}));
    const auto tb = record_episode(b, 42, CorridorDodge::oracle_action);
    EXPECT_EQ(ta, tb);
    EXPECT_NE(ta, record_episode(a, 43, CorridorDodge::oracle_action));
}

TEST(CorridorDodge, GoldenTrace) {
    CorridorDodge env;
    expect_golden(record_episode(env, 17, scripted({0, 1, 2, 2, 1, 0, 1})),
                  kData / "corridor_seed17.trace");
}

TEST(Trace, TextRoundTrip) {
    CorridorDodge env;
    const EpisodeTrace t = record_episode(env, 3, CorridorDodge::oracle_action);
    std::stringstream text;
    write_trace(text, t);
    EXPECT_EQ(read_trace(text), t);
    std::istringstream bad("medn-trace 2\n");
    EXPECT_THROW(read_trace(bad), FormatError);
}

TEST(Trace, ObservationHashIsFnv1a) {
    // FNV-1a 64 of the little-endian bytes of 1.0 (00 .. 00 f0 3f).
    EXPECT_EQ(observation_hash({}), 0xcbf29ce484222325ULL);
    EXPECT_EQ(observation_hash({1.0}), 0xaab1693229ba1db8ULL);
}

TEST(ValueIteration, MatchesExhaustivePolicySearch) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const TabularMDP mdp = random_mdp(3, 2, rng);
        const auto vi = value_iteration(mdp, 0.8, 1e-13);
        std::vector<double> best(3, -1e300);
        for (std::size_t code = 0; code < 8; ++code) {
            const std::vector<std::size_t> pi = {code & 1, (code >> 1) & 1, (code >> 2) & 1};
            const auto v = evaluate_policy(mdp, pi, 0.8);
            for (std::size_t s = 0; s < 3; ++s) {
                best[s] = std::max(best[s], v[s]);
            }
        }
        for (std::size_t s = 0; s < 3; ++s) {
            EXPECT_NEAR(vi.values[s], best[s], 1e-9);
        }
    }
}

TEST(ValueIteration, SweepsContract) {
    Rng rng(8);
    const TabularMDP mdp = random_mdp(6, 3, rng);
    const double gamma = 0.9;
    const auto vi = value_iteration(mdp, gamma, 1e-12);
    ASSERT_GT(vi.sweep_deltas.size(), 2u);
    for (std::size_t k = 1; k < vi.sweep_deltas.size(); ++k) {
        EXPECT_LE(vi.sweep_deltas[k], gamma * vi.sweep_deltas[k - 1] + 1e-12);
    }
    EXPECT_LT(vi.sweep_deltas.back(), 1e-12);
}

TEST(ValueIteration, RejectsBadArguments) {
    Rng rng(1);
    const TabularMDP mdp = random_mdp(3, 2, rng);
    EXPECT_THROW(value_iteration(mdp, 1.0, 1e-9), ContractError);
    EXPECT_THROW(value_iteration(mdp, -0.1, 1e-9), ContractError);
    EXPECT_THROW(value_iteration(mdp, 0.9, 0.0), ContractError);
    EXPECT_NO_THROW(value_iteration(*ChainMDP().tabular(), 1.0, 1e-12));
    TabularMDP broken = mdp;
    broken.transition[0] += 0.1;
    EXPECT_THROW(value_iteration(broken, 0.9, 1e-9), ContractError);
}
