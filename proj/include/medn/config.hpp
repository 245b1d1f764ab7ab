#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "medn/agent.hpp"
#include "medn/network.hpp"
#include "medn/optimizer.hpp"

namespace medn {

// Full description of an experiment. Stored as JSON; see docs/CONFIG.md.
struct RunConfig {
    std::string env_name = "ChainMDP";
    AgentConfig agent;
    // input_dim and action_count are filled from the environment.
    NetworkSpec network;
    OptimizerConfig optimizer;
    std::uint64_t total_steps = 20'000;
    std::vector<std::uint64_t> seeds = {0};
    std::filesystem::path output_dir = "runs";
    std::size_t eval_episodes = 10;
    double eval_epsilon = 0.01;
    // Used by compare only.
    std::vector<std::string> compare_methods = {"ME", "DN"};
    std::vector<std::string> compare_envs;

    // One message per violated field; empty when valid.
    std::vector<std::string> violations() const;
    // Throws ConfigError listing every violated field.
    void validate() const;
};

// Parses JSON text. Missing keys take defaults; unknown keys and
// ill-typed values are reported as violations.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Every effective setting, defaults materialized, keys sorted.
std::string dump_run_config(const RunConfig& config);

} // namespace medn
