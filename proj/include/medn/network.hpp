#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "medn/array.hpp"
#include "medn/optimizer.hpp"
#include "medn/tape.hpp"

namespace medn {

enum class Architecture { SingleStream, Dueling };

// How the value and advantage streams are combined into Q.
//   Naive: Q = V + A
//   Max:   Q = V + (A - max_a' A)
//   Mean:  Q = V + (A - mean_a' A)
enum class Aggregator { Naive, Max, Mean };

const char* to_string(Architecture architecture);
const char* to_string(Aggregator aggregator);
Architecture architecture_from_string(const std::string& name);
Aggregator aggregator_from_string(const std::string& name);

struct NetworkSpec {
    std::size_t input_dim = 0;
    std::size_t action_count = 0;
    std::vector<std::size_t> hidden = {64, 64};
    Architecture architecture = Architecture::Dueling;
    // Ignored by the single-stream network.
    Aggregator aggregator = Aggregator::Mean;

    void validate() const;
    bool operator==(const NetworkSpec&) const = default;
};

// Parameter groups of the dueling network: the shared trunk, the advantage
// stream and the value stream. The single-stream network has a trunk and a
// Q head.
enum class ParamGroup { Trunk, Advantage, Value, QHead };

struct QOutput {
    DenseArray q_values;
    double v_estimate = 0.0;
    // Advantage stream before centering. For the single-stream network this
    // is the Q head output itself.
    DenseArray advantage_raw;
};

// Batched forward pass; all arrays have one row per observation.
struct QBatch {
    DenseArray q_values;       // {batch, |A|}
    DenseArray v_estimate;     // {batch, 1}
    DenseArray advantage_raw;  // {batch, |A|}
};

struct TapedQ {
    Var q_values;
    Var v_estimate;
    Var advantage_raw;
    // Tape handle of every network parameter, keyed like QNetwork::params().
    std::map<std::string, Var> params;
};

// Multilayer Q-function: dense+rectifier trunk followed by either a single
// Q head or separate value/advantage heads.
class QNetwork {
public:
    // Uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    QNetwork(NetworkSpec spec, std::uint64_t seed);
    // Adopts given parameters; names and shapes must match the spec.
    QNetwork(NetworkSpec spec, ParamMap params, std::uint64_t seed = 0);

    const NetworkSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const ParamMap& params() const noexcept { return params_; }
    ParamMap& params() noexcept { return params_; }

    ParamMap group(ParamGroup g) const;

    QOutput forward(std::span<const double> observation) const;
    QBatch forward_batch(const DenseArray& observations) const;

    // Records the forward pass on the tape. With trainable=false the weights
    // enter as constants and receive no gradient.
    TapedQ record(Tape& tape, Var observations, bool trainable) const;

    // Parameter names and shapes implied by a NetworkSpec.
    static std::vector<std::pair<std::string, Shape>> layout(const NetworkSpec& spec);

private:
    NetworkSpec spec_;
    ParamMap params_;
    std::uint64_t seed_ = 0;
};

// Hard copy of the online parameters into the target network.
void sync_target(const QNetwork& online, QNetwork& target);

// argmax with ties broken toward the lowest index.
std::size_t greedy_action(std::span<const double> q_values);

} // namespace medn
