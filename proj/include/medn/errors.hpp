#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace medn {

// Violated precondition of a public operation (bad argument, wrong call order).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Operand shapes do not line up.
class DimensionError : public ContractError {
public:
    using ContractError::ContractError;
};

// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Replay buffer holds fewer transitions than requested.
class NotReadyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents (checkpoints, traces, frames).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run configuration; carries one message per violated field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

} // namespace medn
