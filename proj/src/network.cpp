#include "medn/network.hpp"

#include <cmath>

#include "medn/errors.hpp"
#include "medn/rng.hpp"

namespace medn {
namespace {

std::string trunk_name(std::size_t layer, const char* part) {
    return "trunk." + std::to_string(layer) + "." + part;
}

} // namespace

const char* to_string(Architecture architecture) {
    return architecture == Architecture::Dueling ? "dueling" : "single";
}

const char* to_string(Aggregator aggregator) {
    switch (aggregator) {
    case Aggregator::Naive:
        return "naive";
    case Aggregator::Max:
        return "max";
    case Aggregator::Mean:
        return "mean";
    }
    return "mean";
}

Architecture architecture_from_string(const std::string& name) {
    if (name == "dueling") {
        return Architecture::Dueling;
    }
    if (name == "single") {
        return Architecture::SingleStream;
    }
    throw ContractError("unknown architecture '" + name + "' (expected single or dueling)");
}

Aggregator aggregator_from_string(const std::string& name) {
    if (name == "naive") {
        return Aggregator::Naive;
    }
    if (name == "max") {
        return Aggregator::Max;
    }
    if (name == "mean") {
        return Aggregator::Mean;
    }
    throw ContractError("unknown aggregator '" + name + "' (expected naive, max or mean)");
}

void NetworkSpec::validate() const {
    if (input_dim == 0) {
        throw ContractError("network: input_dim must be positive");
    }
    if (action_count < 2) {
        throw ContractError("network: action_count must be at least 2");
    }
    for (std::size_t width : hidden) {
        if (width == 0) {
            throw ContractError("network: hidden widths must be positive");
        }
    }
}

std::vector<std::pair<std::string, Shape>> QNetwork::layout(const NetworkSpec& spec) {
    std::vector<std::pair<std::string, Shape>> out;
    std::size_t width = spec.input_dim;
    for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
        out.emplace_back(trunk_name(l, "weight"), Shape{width, spec.hidden[l]});
        out.emplace_back(trunk_name(l, "bias"), Shape{spec.hidden[l]});
        width = spec.hidden[l];
    }
    if (spec.architecture == Architecture::Dueling) {
        out.emplace_back("advantage.weight", Shape{width, spec.action_count});
        out.emplace_back("advantage.bias", Shape{spec.action_count});
        out.emplace_back("value.weight", Shape{width, 1});
        out.emplace_back("value.bias", Shape{1});
    } else {
        out.emplace_back("q_head.weight", Shape{width, spec.action_count});
        out.emplace_back("q_head.bias", Shape{spec.action_count});
    }
    return out;
}

QNetwork::QNetwork(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    spec_.validate();
    Rng rng(seed);
    for (auto& [name, shape] : layout(spec_)) {
        DenseArray array(shape);
        if (shape.size() == 2) {
            const double limit =
                std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
            for (double& w : array.data()) {
                w = rng.uniform(-limit, limit);
            }
        }
        params_.emplace(name, std::move(array));
    }
}

QNetwork::QNetwork(NetworkSpec spec, ParamMap params, std::uint64_t seed)
    : spec_(std::move(spec)), params_(std::move(params)), seed_(seed) {
    spec_.validate();
    const auto expected = layout(spec_);
    if (expected.size() != params_.size()) {
        throw DimensionError("network: expected " + std::to_string(expected.size()) +
                             " parameter arrays, got " + std::to_string(params_.size()));
    }
    for (const auto& [name, shape] : expected) {
        const auto it = params_.find(name);
        if (it == params_.end()) {
            throw DimensionError("network: missing parameter '" + name + "'");
        }
        if (it->second.shape() != shape) {
            throw DimensionError("network: parameter '" + name + "' has shape " +
                                 shape_string(it->second.shape()) + ", expected " +
                                 shape_string(shape));
        }
    }
}

ParamMap QNetwork::group(ParamGroup g) const {
    const char* prefix = "trunk.";
    switch (g) {
    case ParamGroup::Trunk:
        break;
    case ParamGroup::Advantage:
        prefix = "advantage.";
        break;
    case ParamGroup::Value:
        prefix = "value.";
        break;
    case ParamGroup::QHead:
        prefix = "q_head.";
        break;
    }
    ParamMap out;
    for (const auto& [name, array] : params_) {
        if (name.starts_with(prefix)) {
            out.emplace(name, array);
        }
    }
    return out;
}

TapedQ QNetwork::record(Tape& tape, Var observations, bool trainable) const {
    const DenseArray& obs = tape.value(observations);
    if (obs.cols() != spec_.input_dim || (obs.rank() != 1 && obs.rank() != 2)) {
        throw DimensionError("network: observation " + shape_string(obs.shape()) +
                             " does not match input width " + std::to_string(spec_.input_dim));
    }
    TapedQ out;
    for (const auto& [name, array] : params_) {
        out.params[name] = trainable ? tape.parameter(array) : tape.constant(array);
    }
    Var h = observations;
    for (std::size_t l = 0; l < spec_.hidden.size(); ++l) {
        h = tape.relu(tape.dense(h, out.params.at(trunk_name(l, "weight")),
                                 out.params.at(trunk_name(l, "bias"))));
    }
    if (spec_.architecture == Architecture::SingleStream) {
        out.q_values = tape.dense(h, out.params.at("q_head.weight"), out.params.at("q_head.bias"));
        out.advantage_raw = out.q_values;
        out.v_estimate = tape.row_max(out.q_values);
        return out;
    }
    out.advantage_raw =
        tape.dense(h, out.params.at("advantage.weight"), out.params.at("advantage.bias"));
    out.v_estimate = tape.dense(h, out.params.at("value.weight"), out.params.at("value.bias"));
    Var centered = out.advantage_raw;
    switch (spec_.aggregator) {
    case Aggregator::Naive:
        break;
    case Aggregator::Max:
        centered = tape.sub_column(out.advantage_raw, tape.row_max(out.advantage_raw));
        break;
    case Aggregator::Mean:
        centered = tape.sub_column(out.advantage_raw, tape.row_mean(out.advantage_raw));
        break;
    }
    out.q_values = tape.add_column(centered, out.v_estimate);
    return out;
}

QOutput QNetwork::forward(std::span<const double> observation) const {
    Tape tape;
    const Var obs = tape.constant(
        DenseArray({observation.size()}, std::vector<double>(observation.begin(), observation.end())));
    const TapedQ q = record(tape, obs, false);
    QOutput out;
    out.q_values = tape.value(q.q_values);
    out.v_estimate = tape.value(q.v_estimate)[0];
    out.advantage_raw = tape.value(q.advantage_raw);
    return out;
}

QBatch QNetwork::forward_batch(const DenseArray& observations) const {
    Tape tape;
    const Var obs = tape.constant(observations);
    const TapedQ q = record(tape, obs, false);
    return QBatch{tape.value(q.q_values), tape.value(q.v_estimate), tape.value(q.advantage_raw)};
}

void sync_target(const QNetwork& online, QNetwork& target) {
    if (!(online.spec() == target.spec())) {
        throw DimensionError("sync_target: online and target networks differ in shape");
    }
    target.params() = online.params();
}

std::size_t greedy_action(std::span<const double> q_values) {
    if (q_values.empty()) {
        throw ContractError("greedy_action: no actions");
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < q_values.size(); ++a) {
        if (q_values[a] > q_values[best]) {
            best = a;
        }
    }
    return best;
}

} // namespace medn
