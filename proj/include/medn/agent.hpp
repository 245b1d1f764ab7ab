#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medn/environment.hpp"
#include "medn/losses.hpp"
#include "medn/network.hpp"
#include "medn/optimizer.hpp"
#include "medn/replay.hpp"
#include "medn/rng.hpp"

namespace medn {

struct AgentConfig {
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::uint64_t epsilon_decay_steps = 10'000;
    std::uint64_t target_sync_period = 500;
    std::size_t batch_size = 32;
    std::uint64_t warmup_steps = 1'000;
    double gamma = 0.99;
    LossKind loss = LossKind::Dqn;
    EntropyConfig entropy;
    // Linear decay of entropy.alpha to zero over this many steps; 0 keeps it constant.
    std::uint64_t entropy_anneal_steps = 0;
    std::size_t replay_capacity = 50'000;
    std::optional<double> huber_delta;

    // One message per violated field; empty when valid.
    std::vector<std::string> violations() const;
};

struct TrainStats {
    std::uint64_t step = 0;
    // Undiscounted return of the current episode up to and including this step.
    double episode_return = 0.0;
    // Loss of this step's gradient update; 0 before training starts.
    double loss_value = 0.0;
    // Mean advantage entropy over the minibatch, or at the acting
    // observation on steps without an update.
    double mean_entropy = 0.0;
    double epsilon = 0.0;
    bool episode_end = false;
    bool updated = false;
};

// Linear from epsilon_start to epsilon_end over epsilon_decay_steps, then flat.
double epsilon_at(const AgentConfig& config, std::uint64_t step);

// alpha at a given step, honoring entropy_anneal_steps.
double entropy_alpha_at(const AgentConfig& config, std::uint64_t step);

// With probability epsilon a uniform action, otherwise the greedy action
// (lowest index on ties). Draws the exploration coin on every call, plus an
// action index when exploring.
std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng);
std::size_t select_action(const QNetwork& network, std::span<const double> observation,
                          double epsilon, Rng& rng);

// Online/target networks, replay, optimizer and environment of one training
// run. Every random stream derives from the run seed.
class Agent {
public:
    Agent(AgentConfig config, NetworkSpec network, OptimizerConfig optimizer,
          std::unique_ptr<Environment> env, std::uint64_t seed);

    // One environment step; pushes the transition, then (once warmup_steps
    // transitions are stored) one minibatch gradient step. The target is
    // synced whenever the step count is a multiple of target_sync_period.
    TrainStats train_step();

    const QNetwork& online() const noexcept { return online_; }
    const QNetwork& target() const noexcept { return target_; }
    const ReplayBuffer& replay() const noexcept { return replay_; }
    const AgentConfig& config() const noexcept { return config_; }
    Environment& environment() noexcept { return *env_; }
    std::uint64_t steps() const noexcept { return steps_; }
    std::uint64_t episodes() const noexcept { return episodes_; }

private:
    void begin_episode();

    AgentConfig config_;
    std::unique_ptr<Environment> env_;
    std::uint64_t seed_;
    QNetwork online_;
    QNetwork target_;
    Optimizer optimizer_;
    ReplayBuffer replay_;
    Rng action_rng_;
    Observation observation_;
    double episode_return_ = 0.0;
    std::uint64_t steps_ = 0;
    std::uint64_t episodes_ = 0;
};

struct EvalResult {
    std::vector<double> returns;
    double mean = 0.0;
    // Population standard deviation.
    double std = 0.0;
};

// Runs `episodes` episodes with epsilon-greedy acting. Episode reset seeds
// and exploration draws derive from `seed`.
EvalResult evaluate(const QNetwork& network, Environment& env, std::size_t episodes,
                    double epsilon, std::uint64_t seed);

// Evaluation seed tied to a network, so a checkpoint reproduces the numbers
// of the run that produced it.
std::uint64_t evaluation_seed(const QNetwork& network);

} // namespace medn
