#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medn/network.hpp"
#include "medn/tape.hpp"

namespace medn {

// A minibatch of transitions. States are stored one per row.
struct TDBatch {
    DenseArray states;                 // {batch, obs_dim}
    std::vector<std::size_t> actions;
    std::vector<double> rewards;
    DenseArray next_states;            // {batch, obs_dim}
    std::vector<std::uint8_t> terminal;
    double gamma = 0.99;

    std::size_t size() const noexcept { return actions.size(); }
    void validate() const;
};

struct EntropyConfig {
    double alpha = 0.01;
    double temperature = 1.0;

    void validate() const;
};

enum class LossKind { Dqn, MaxEnt };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct LossOptions {
    LossKind kind = LossKind::Dqn;
    EntropyConfig entropy;
    // Huber penalty on the TD error instead of the plain square.
    std::optional<double> huber_delta;
};

// Recorded loss together with the handles needed to read it back.
struct LossGraph {
    Tape tape;
    Var loss;
    Var td_loss;
    // Mean over the batch of the advantage-stream entropy. Recorded for both
    // loss kinds; only the MaxEnt loss depends on it.
    Var mean_entropy;
    TapedQ online;

    double loss_value() const { return tape.value(loss)[0]; }
    double td_loss_value() const { return tape.value(td_loss)[0]; }
    double mean_entropy_value() const { return tape.value(mean_entropy)[0]; }

    // d loss / d p for every online parameter p.
    ParamMap gradients() const;
};

// y = r for terminal transitions, r + gamma * max_a' Q_target(s', a') otherwise.
std::vector<double> td_target(const TDBatch& batch, const QNetwork& target);

// mean_i (y_i - Q(s_i, a_i))^2 with y treated as a constant.
LossGraph dqn_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                   std::optional<double> huber_delta = std::nullopt);

// dqn_loss - alpha * mean_i H(softmax(A(s_i, .) / tau)).
LossGraph maxent_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                      const EntropyConfig& entropy,
                      std::optional<double> huber_delta = std::nullopt);

LossGraph build_loss(const TDBatch& batch, const QNetwork& online, const QNetwork& target,
                     const LossOptions& options);

// Shannon entropy (natural log) of softmax(advantage_raw / tau).
double advantage_entropy(std::span<const double> advantage_raw, const EntropyConfig& cfg);

} // namespace medn
