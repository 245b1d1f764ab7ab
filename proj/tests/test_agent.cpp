#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "medn/agent.hpp"
#include "medn/errors.hpp"

using namespace medn;

namespace {

AgentConfig quick_config() {
    AgentConfig c;
    c.epsilon_decay_steps = 200;
    c.target_sync_period = 25;
    c.batch_size = 8;
    c.warmup_steps = 20;
    c.replay_capacity = 500;
    return c;
}

NetworkSpec small_network() {
    NetworkSpec n;
    n.hidden = {16};
    return n;
}

OptimizerConfig fast_optimizer() {
    OptimizerConfig o;
    o.learning_rate = 1e-2;
    return o;
}

struct Trajectory {
    std::vector<TrainStats> stats;
    ParamMap params;
};

Trajectory run_agent(AgentConfig config, std::uint64_t seed, std::size_t steps,
              const std::string& env = "ChainMDP") {
    Agent agent(config, small_network(), fast_optimizer(), make_environment(env), seed);
    Trajectory run;
    for (std::size_t i = 0; i < steps; ++i) {
        run.stats.push_back(agent.train_step());
    }
    run.params = agent.online().params();
    return run;
}

bool same_stats(const TrainStats& a, const TrainStats& b) {
    return a.step == b.step && a.episode_return == b.episode_return && a.loss_value == b.loss_value &&
           a.mean_entropy == b.mean_entropy && a.epsilon == b.epsilon &&
           a.episode_end == b.episode_end && a.updated == b.updated;
}

} // namespace

TEST(Schedules, EpsilonDecaysLinearlyThenHolds) {
    AgentConfig c;
    c.epsilon_start = 1.0;
    c.epsilon_end = 0.1;
    c.epsilon_decay_steps = 100;
    EXPECT_EQ(epsilon_at(c, 0), 1.0);
    EXPECT_NEAR(epsilon_at(c, 50), 0.55, 1e-15);
    EXPECT_EQ(epsilon_at(c, 100), 0.1);
    EXPECT_EQ(epsilon_at(c, 100000), 0.1);
    for (std::uint64_t t = 1; t < 120; ++t) {
        EXPECT_LE(epsilon_at(c, t), epsilon_at(c, t - 1));
    }
}

TEST(Schedules, EntropyAlphaAnnealing) {
    AgentConfig c;
    c.entropy.alpha = 0.4;
    EXPECT_EQ(entropy_alpha_at(c, 12345), 0.4);
    c.entropy_anneal_steps = 100;
    EXPECT_EQ(entropy_alpha_at(c, 0), 0.4);
    EXPECT_NEAR(entropy_alpha_at(c, 25), 0.3, 1e-15);
    EXPECT_EQ(entropy_alpha_at(c, 100), 0.0);
    EXPECT_EQ(entropy_alpha_at(c, 500), 0.0);
}

TEST(SelectAction, GreedyAtZeroEpsilon) {
    Rng rng(1);
    const std::vector<double> q = {0.1, 0.7, 0.7, -3.0};
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(select_action(q, 0.0, rng), 1u);
    }
    EXPECT_THROW(select_action(q, 1.5, rng), ContractError);
}

TEST(SelectAction, UniformAtFullEpsilon) {
    Rng rng(2);
    const std::vector<double> q = {5.0, 0.0, 0.0};
    std::vector<double> counts(3, 0.0);
    for (int i = 0; i < 30'000; ++i) {
        counts[select_action(q, 1.0, rng)] += 1.0;
    }
    double stat = 0.0;
    for (double c : counts) {
        stat += (c - 10'000.0) * (c - 10'000.0) / 10'000.0;
    }
    EXPECT_LT(stat, 13.816);  // 2 degrees of freedom, 99.9%
}

TEST(SelectAction, ExplorationRateMatchesEpsilon) {
    Rng rng(3);
    const std::vector<double> q = {1.0, 0.0};
    int non_greedy = 0;
    const int n = 40'000;
    for (int i = 0; i < n; ++i) {
        non_greedy += select_action(q, 0.3, rng) == 1 ? 1 : 0;
    }
    // Exploring picks the non-greedy action half the time: rate 0.15.
    EXPECT_NEAR(non_greedy / static_cast<double>(n), 0.15, 0.01);
}

TEST(AgentConfig, ViolationsNameEveryField) {
    AgentConfig c;
    c.epsilon_start = 1.5;
    c.gamma = -0.1;
    c.target_sync_period = 0;
    c.batch_size = 64;
    c.warmup_steps = 10;
    c.entropy.temperature = 0.0;
    const auto v = c.violations();
    EXPECT_EQ(v.size(), 5u);
    std::string all;
    for (const auto& s : v) {
        all += s + "\n";
    }
    for (const char* field : {"epsilon_start", "gamma", "target_sync_period", "warmup_steps", "temperature"}) {
        EXPECT_NE(all.find(field), std::string::npos) << field;
    }
    EXPECT_TRUE(AgentConfig{}.violations().empty());
    EXPECT_THROW(Agent(c, small_network(), fast_optimizer(), make_environment("ChainMDP"), 0), ConfigError);
}

TEST(Agent, NoUpdatesDuringWarmup) {
    const AgentConfig c = quick_config();
    const Trajectory run = run_agent(c, 1, 40);
    for (const auto& s : run.stats) {
        EXPECT_EQ(s.updated, s.step + 1 >= c.warmup_steps) << s.step;
        if (!s.updated) {
            EXPECT_EQ(s.loss_value, 0.0);
        }
        EXPECT_EQ(s.epsilon, epsilon_at(c, s.step));
    }
}

TEST(Agent, TargetSyncsExactlyOnPeriod) {
    const AgentConfig c = quick_config();
    Agent agent(c, small_network(), fast_optimizer(), make_environment("ChainMDP"), 4);
    ParamMap target_before = agent.target().params();
    for (int i = 0; i < 120; ++i) {
        agent.train_step();
        if (agent.steps() % c.target_sync_period == 0) {
            EXPECT_EQ(agent.target().params(), agent.online().params()) << agent.steps();
        } else {
            EXPECT_EQ(agent.target().params(), target_before) << agent.steps();
        }
        target_before = agent.target().params();
    }
}

TEST(Agent, TerminationVersusTruncationInReplay) {
    AgentConfig c = quick_config();
    c.replay_capacity = 500;
    Agent agent(c, small_network(), fast_optimizer(), make_environment("ChainMDP"), 9);
    std::size_t terminal_seen = 0;
    std::size_t truncated_seen = 0;
    for (int i = 0; i < 400; ++i) {
        const TrainStats s = agent.train_step();
        const Transition& last = agent.replay().at(agent.replay().size() - 1);
        if (s.episode_end) {
            // Only entering the goal is a true termination.
            const bool at_goal = last.next_state[4] == 1.0;
            EXPECT_EQ(last.terminal, at_goal);
            terminal_seen += at_goal ? 1 : 0;
            truncated_seen += at_goal ? 0 : 1;
        } else {
            EXPECT_FALSE(last.terminal);
        }
    }
    EXPECT_GT(terminal_seen, 0u);
    EXPECT_GT(truncated_seen, 0u);
}

TEST(Agent, EpisodeReturnAccumulatesAndResets) {
    const Trajectory run = run_agent(quick_config(), 3, 200);
    // Chain rewards: -0.01 per step, +1 on entering the goal (which ends the episode).
    double running = 0.0;
    for (const auto& s : run.stats) {
        const double reward = s.episode_return - running;
        if (std::abs(reward - 1.0) < 1e-9) {
            EXPECT_TRUE(s.episode_end);
        } else {
            EXPECT_NEAR(reward, -0.01, 1e-9);
        }
        running = s.episode_end ? 0.0 : s.episode_return;
    }
    EXPECT_TRUE(std::any_of(run.stats.begin(), run.stats.end(), [](const TrainStats& s) { return s.episode_end; }));
}

TEST(Agent, SameSeedSameTrajectory) {
    const Trajectory a = run_agent(quick_config(), 11, 150, "GridWorld");
    const Trajectory b = run_agent(quick_config(), 11, 150, "GridWorld");
    ASSERT_EQ(a.stats.size(), b.stats.size());
    for (std::size_t i = 0; i < a.stats.size(); ++i) {
        EXPECT_TRUE(same_stats(a.stats[i], b.stats[i])) << i;
    }
    EXPECT_EQ(a.params, b.params);
    const Trajectory c = run_agent(quick_config(), 12, 150, "GridWorld");
    EXPECT_NE(a.params, c.params);
}

TEST(Agent, ZeroAlphaMaxEntReproducesDqnBitForBit) {
    AgentConfig dqn = quick_config();
    AgentConfig maxent = dqn;
    maxent.loss = LossKind::MaxEnt;
    maxent.entropy.alpha = 0.0;
    const Trajectory a = run_agent(dqn, 21, 150, "CorridorDodge");
    const Trajectory b = run_agent(maxent, 21, 150, "CorridorDodge");
    for (std::size_t i = 0; i < a.stats.size(); ++i) {
        EXPECT_TRUE(same_stats(a.stats[i], b.stats[i])) << i;
    }
    EXPECT_EQ(a.params, b.params);
}

TEST(Agent, PositiveAlphaChangesTheTrajectory) {
    AgentConfig maxent = quick_config();
    maxent.loss = LossKind::MaxEnt;
    maxent.entropy.alpha = 0.5;
    EXPECT_NE(run_agent(quick_config(), 21, 80, "CorridorDodge").params,
              run_agent(maxent, 21, 80, "CorridorDodge").params);
}

TEST(Evaluate, StatisticsAndDeterminism) {
    const QNetwork net(NetworkSpec{12, 3, {8}, Architecture::Dueling, Aggregator::Mean}, 5);
    CorridorDodge env;
    const EvalResult r = evaluate(net, env, 7, 0.2, 99);
    ASSERT_EQ(r.returns.size(), 7u);
    double mean = 0.0;
    for (double v : r.returns) {
        mean += v / 7.0;
    }
    double var = 0.0;
    for (double v : r.returns) {
        var += (v - mean) * (v - mean) / 7.0;
    }
    EXPECT_NEAR(r.mean, mean, 1e-12);
    EXPECT_NEAR(r.std, std::sqrt(var), 1e-12);
    const EvalResult again = evaluate(net, env, 7, 0.2, 99);
    EXPECT_EQ(again.returns, r.returns);
    EXPECT_NE(evaluation_seed(net), evaluation_seed(QNetwork(net.spec(), 6)));
}
