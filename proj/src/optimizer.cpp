#include "medn/optimizer.hpp"

#include <cmath>

#include "medn/errors.hpp"

namespace medn {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw ContractError("optimizer: learning_rate must be > 0");
    }
    if (!(decay >= 0.0 && decay < 1.0)) {
        throw ContractError("optimizer: decay must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw ContractError("optimizer: epsilon must be > 0");
    }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    config_.validate();
}

void Optimizer::step(ParamMap& params, const ParamMap& grads) {
    if (params.size() != grads.size()) {
        throw ContractError("optimizer: " + std::to_string(grads.size()) + " gradients for " +
                            std::to_string(params.size()) + " parameters");
    }
    for (auto& [name, param] : params) {
        const auto it = grads.find(name);
        if (it == grads.end()) {
            throw ContractError("optimizer: no gradient for parameter '" + name + "'");
        }
        const DenseArray& grad = it->second;
        if (grad.shape() != param.shape()) {
            throw DimensionError("optimizer: gradient " + shape_string(grad.shape()) +
                                 " for parameter '" + name + "' " + shape_string(param.shape()));
        }
        if (config_.kind == OptimizerKind::Sgd) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                param[i] -= config_.learning_rate * grad[i];
            }
            continue;
        }
        auto [acc_it, inserted] = accumulators_.try_emplace(name, param.shape());
        DenseArray& acc = acc_it->second;
        if (acc.shape() != param.shape()) {
            throw DimensionError("optimizer: accumulator for '" + name + "' has shape " +
                                 shape_string(acc.shape()));
        }
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double g = grad[i];
            acc[i] = config_.decay * acc[i] + (1.0 - config_.decay) * g * g;
            param[i] -= config_.learning_rate * g / std::sqrt(acc[i] + config_.epsilon);
        }
    }
}

const char* to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Sgd ? "sgd" : "rmsprop";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "sgd") {
        return OptimizerKind::Sgd;
    }
    if (name == "rmsprop") {
        return OptimizerKind::RmsProp;
    }
    throw ContractError("unknown optimizer '" + name + "' (expected sgd or rmsprop)");
}

} // namespace medn
