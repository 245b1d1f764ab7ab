#include "medn/losses.hpp"

#include <cmath>

#include "medn/errors.hpp"

namespace medn {
namespace {

// Per-row entropy of softmax(logits / tau), shape {rows, 1}.
Var row_entropy(Tape& tape, Var logits, double temperature) {
    const Var p = tape.softmax(logits, temperature);
    const Var log_p = tape.log_softmax(logits, temperature);
    return tape.scale(tape.row_sum(tape.mul(p, log_p)), -1.0);
}

LossGraph record_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                      LossKind kind, const EntropyConfig& entropy,
                      std::optional<double> huber_delta) {
    const std::vector<double> y = td_target(batch, target);
    for (std::size_t a : batch.actions) {
        if (a >= online.spec().action_count) {
            throw ContractError("loss: action index " + std::to_string(a) + " out of range for " +
                                std::to_string(online.spec().action_count) + " actions");
        }
    }
    LossGraph g;
    Tape& tape = g.tape;
    const Var states = tape.constant(batch.states);
    g.online = online.record(tape, states, true);
    const Var chosen = tape.gather(g.online.q_values, batch.actions);
    const Var targets = tape.constant(DenseArray({batch.size(), 1}, y));
    const Var error = tape.sub(targets, chosen);
    const Var penalty = huber_delta ? tape.huber(error, *huber_delta) : tape.square(error);
    g.td_loss = tape.mean(penalty);
    g.mean_entropy = tape.mean(row_entropy(tape, g.online.advantage_raw, entropy.temperature));
    if (kind == LossKind::MaxEnt) {
        g.loss = tape.sub(g.td_loss, tape.scale(g.mean_entropy, entropy.alpha));
    } else {
        g.loss = g.td_loss;
    }
    return g;
}

} // namespace

void TDBatch::validate() const {
    const std::size_t n = actions.size();
    if (n == 0) {
        throw ContractError("TD batch is empty");
    }
    if (rewards.size() != n || terminal.size() != n || states.rows() != n ||
        next_states.rows() != n || states.rank() != 2 || next_states.rank() != 2) {
        throw DimensionError("TD batch: sequences have unequal lengths (actions " +
                             std::to_string(n) + ", rewards " + std::to_string(rewards.size()) +
                             ", terminal " + std::to_string(terminal.size()) + ", states " +
                             shape_string(states.shape()) + ", next_states " +
                             shape_string(next_states.shape()) + ")");
    }
    if (states.shape() != next_states.shape()) {
        throw DimensionError("TD batch: states and next_states differ in shape");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ContractError("TD batch: gamma must lie in [0, 1]");
    }
}

void EntropyConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ContractError("entropy: alpha must be >= 0");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ContractError("entropy: temperature must be > 0");
    }
}

const char* to_string(LossKind kind) {
    return kind == LossKind::Dqn ? "DQN" : "MaxEnt";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "DQN") {
        return LossKind::Dqn;
    }
    if (name == "MaxEnt") {
        return LossKind::MaxEnt;
    }
    throw ContractError("unknown loss '" + name + "' (expected DQN or MaxEnt)");
}

ParamMap LossGraph::gradients() const {
    const Gradients grads = tape.backward(loss);
    ParamMap out;
    for (const auto& [name, var] : online.params) {
        out.emplace(name, grads.of(var));
    }
    return out;
}

std::vector<double> td_target(const TDBatch& batch, const QNetwork& target) {
    batch.validate();
    const QBatch next = target.forward_batch(batch.next_states);
    const std::size_t actions = next.q_values.cols();
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (batch.terminal[i] || batch.gamma == 0.0) {
            y[i] = batch.rewards[i];
            continue;
        }
        const auto row = next.q_values.row(i);
        y[i] = batch.rewards[i] + batch.gamma * row[greedy_action(row.first(actions))];
    }
    return y;
}

LossGraph dqn_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                   std::optional<double> huber_delta) {
    return record_loss(batch, online, target, LossKind::Dqn, EntropyConfig{}, huber_delta);
}

LossGraph maxent_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                      const EntropyConfig& entropy, std::optional<double> huber_delta) {
    entropy.validate();
    return record_loss(batch, online, target, LossKind::MaxEnt, entropy, huber_delta);
}

LossGraph build_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                     const LossOptions& options) {
    if (options.kind == LossKind::MaxEnt) {
        return maxent_loss(batch, online, target, options.entropy, options.huber_delta);
    }
    return dqn_loss(batch, online, target, options.huber_delta);
}

double advantage_entropy(std::span<const double> advantage_raw, const EntropyConfig& cfg) {
    if (advantage_raw.size() < 2) {
        throw ContractError("advantage_entropy: needs at least 2 actions, got " +
                            std::to_string(advantage_raw.size()));
    }
    cfg.validate();
    Tape tape;
    const Var logits = tape.constant(DenseArray(
        {advantage_raw.size()}, std::vector<double>(advantage_raw.begin(), advantage_raw.end())));
    return tape.value(row_entropy(tape, logits, cfg.temperature))[0];
}

} // namespace medn
