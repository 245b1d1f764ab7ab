#include "medn/agent.hpp"

#include <algorithm>
#include <cmath>

#include "medn/errors.hpp"

namespace medn {
namespace {

enum Stream : std::uint64_t {
    kNetworkStream = 1,
    kReplayStream = 2,
    kActionStream = 3,
    kEpisodeStream = 4,
    kEvaluationStream = 5,
};

NetworkSpec fitted(NetworkSpec spec, const Environment& env) {
    spec.input_dim = env.spec().observation_dim;
    spec.action_count = env.spec().action_count;
    return spec;
}

} // namespace

std::vector<std::string> AgentConfig::violations() const {
    std::vector<std::string> out;
    auto unit = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            out.push_back(std::string("agent.") + name + " (" + std::to_string(v) +
                          ") must lie in [0, 1]");
        }
    };
    unit(epsilon_start, "epsilon_start");
    unit(epsilon_end, "epsilon_end");
    unit(gamma, "gamma");
    if (epsilon_end > epsilon_start) {
        out.push_back("agent.epsilon_end (" + std::to_string(epsilon_end) +
                      ") must be <= agent.epsilon_start (" + std::to_string(epsilon_start) + ")");
    }
    if (epsilon_decay_steps == 0) {
        out.emplace_back("agent.epsilon_decay_steps must be positive");
    }
    if (target_sync_period == 0) {
        out.emplace_back("agent.target_sync_period must be positive");
    }
    if (batch_size == 0) {
        out.emplace_back("agent.batch_size must be positive");
    }
    if (warmup_steps == 0) {
        out.emplace_back("agent.warmup_steps must be positive");
    }
    if (warmup_steps < batch_size) {
        out.push_back("agent.warmup_steps (" + std::to_string(warmup_steps) +
                      ") must be >= agent.batch_size (" + std::to_string(batch_size) + ")");
    }
    if (replay_capacity < batch_size) {
        out.emplace_back("agent.replay_capacity must be >= agent.batch_size");
    }
    if (!(entropy.alpha >= 0.0) || !std::isfinite(entropy.alpha)) {
        out.emplace_back("agent.entropy.alpha must be >= 0");
    }
    if (!(entropy.temperature > 0.0) || !std::isfinite(entropy.temperature)) {
        out.emplace_back("agent.entropy.temperature must be > 0");
    }
    if (huber_delta && !(*huber_delta > 0.0)) {
        out.emplace_back("agent.huber_delta must be > 0 when set");
    }
    return out;
}

double epsilon_at(const AgentConfig& config, std::uint64_t step) {
    if (step >= config.epsilon_decay_steps) {
        return config.epsilon_end;
    }
    const double fraction =
        static_cast<double>(step) / static_cast<double>(config.epsilon_decay_steps);
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * fraction;
}

double entropy_alpha_at(const AgentConfig& config, std::uint64_t step) {
    if (config.entropy_anneal_steps == 0) {
        return config.entropy.alpha;
    }
    const double remaining =
        1.0 - static_cast<double>(step) / static_cast<double>(config.entropy_anneal_steps);
    return config.entropy.alpha * std::max(0.0, remaining);
}

std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ContractError("select_action: epsilon must lie in [0, 1]");
    }
    if (rng.uniform01() < epsilon) {
        return static_cast<std::size_t>(rng.index(q_values.size()));
    }
    return greedy_action(q_values);
}

std::size_t select_action(const QNetwork& network, std::span<const double> observation,
                          double epsilon, Rng& rng) {
    const QOutput q = network.forward(observation);
    return select_action(q.q_values.data(), epsilon, rng);
}

Agent::Agent(AgentConfig config, NetworkSpec network, OptimizerConfig optimizer,
             std::unique_ptr<Environment> env, std::uint64_t seed)
    : config_(config), env_(std::move(env)), seed_(seed),
      online_(fitted(network, *env_), mix_seed(seed, kNetworkStream)),
      target_(online_), optimizer_(optimizer),
      replay_(config.replay_capacity, env_->spec().observation_dim, env_->spec().action_count,
              mix_seed(seed, kReplayStream)),
      action_rng_(mix_seed(seed, kActionStream)) {
    if (auto v = config_.violations(); !v.empty()) {
        throw ConfigError(std::move(v));
    }
    begin_episode();
}

void Agent::begin_episode() {
    observation_ = env_->reset(mix_seed(mix_seed(seed_, kEpisodeStream), episodes_));
    episode_return_ = 0.0;
}

TrainStats Agent::train_step() {
    TrainStats stats;
    stats.step = steps_;
    stats.epsilon = epsilon_at(config_, steps_);

    const QOutput q = online_.forward(observation_);
    const std::size_t action = select_action(q.q_values.data(), stats.epsilon, action_rng_);
    StepResult result = env_->step(action);
    replay_.push(Transition{observation_, action, result.reward, result.observation,
                            result.terminal});
    episode_return_ += result.reward;
    stats.episode_return = episode_return_;

    if (steps_ + 1 >= config_.warmup_steps && replay_.size() >= config_.batch_size) {
        const TDBatch batch = replay_.sample(config_.batch_size, config_.gamma);
        LossOptions options;
        options.kind = config_.loss;
        options.entropy = config_.entropy;
        options.entropy.alpha = entropy_alpha_at(config_, steps_);
        options.huber_delta = config_.huber_delta;
        const LossGraph graph = build_loss(batch, online_, target_, options);
        optimizer_.step(online_.params(), graph.gradients());
        stats.loss_value = graph.loss_value();
        stats.mean_entropy = graph.mean_entropy_value();
        stats.updated = true;
    } else {
        stats.mean_entropy = advantage_entropy(q.advantage_raw.data(), config_.entropy);
    }

    ++steps_;
    if (steps_ % config_.target_sync_period == 0) {
        sync_target(online_, target_);
    }

    if (result.done()) {
        stats.episode_end = true;
        ++episodes_;
        begin_episode();
    } else {
        observation_ = std::move(result.observation);
    }
    return stats;
}

EvalResult evaluate(const QNetwork& network, Environment& env, std::size_t episodes,
                    double epsilon, std::uint64_t seed) {
    if (episodes == 0) {
        throw ContractError("evaluate: episodes must be at least 1");
    }
    if (env.spec().observation_dim != network.spec().input_dim ||
        env.spec().action_count != network.spec().action_count) {
        throw DimensionError("evaluate: network does not fit environment " + env.name());
    }
    Rng rng(mix_seed(seed, 0));
    EvalResult result;
    for (std::size_t e = 0; e < episodes; ++e) {
        Observation obs = env.reset(mix_seed(seed, 1 + e));
        double total = 0.0;
        for (;;) {
            const std::size_t action = select_action(network, obs, epsilon, rng);
            StepResult r = env.step(action);
            total += r.reward;
            if (r.done()) {
                break;
            }
            obs = std::move(r.observation);
        }
        result.returns.push_back(total);
    }
    double sum = 0.0;
    for (double r : result.returns) {
        sum += r;
    }
    result.mean = sum / static_cast<double>(episodes);
    double sq = 0.0;
    for (double r : result.returns) {
        sq += (r - result.mean) * (r - result.mean);
    }
    result.std = std::sqrt(sq / static_cast<double>(episodes));
    return result;
}

std::uint64_t evaluation_seed(const QNetwork& network) {
    return mix_seed(network.seed(), kEvaluationStream);
}

} // namespace medn
