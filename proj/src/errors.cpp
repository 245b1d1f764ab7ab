#include "medn/errors.hpp"

namespace medn {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
    std::string text = "invalid configuration:";
    for (const auto& v : violations) {
        text += "\n  - ";
        text += v;
    }
    return text;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

} // namespace medn
