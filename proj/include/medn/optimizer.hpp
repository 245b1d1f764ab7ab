#pragma once

#include <map>
#include <string>

#include "medn/array.hpp"

namespace medn {

// Named parameter arrays in a fixed (sorted) iteration order.
using ParamMap = std::map<std::string, DenseArray>;

enum class OptimizerKind { Sgd, RmsProp };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::RmsProp;
    double learning_rate = 2.5e-4;
    double decay = 0.95;
    double epsilon = 1e-2;

    void validate() const;
};

// SGD:     p <- p - lr * g
// RMSProp: a <- decay * a + (1 - decay) * g^2;  p <- p - lr * g / sqrt(a + epsilon)
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    void step(ParamMap& params, const ParamMap& grads);

    const OptimizerConfig& config() const noexcept { return config_; }
    // Running squared-gradient averages, keyed like the parameters (RMSProp only).
    const ParamMap& accumulators() const noexcept { return accumulators_; }

private:
    OptimizerConfig config_;
    ParamMap accumulators_;
};

const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

} // namespace medn
