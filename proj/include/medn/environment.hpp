#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "medn/rng.hpp"
#include "medn/tabular.hpp"

namespace medn {

using Observation = std::vector<double>;

struct EnvSpec {
    std::size_t observation_dim = 0;
    std::size_t action_count = 0;
    std::size_t max_episode_steps = 0;
    double discount_hint = 0.99;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool terminal = false;
    // Time limit reached without termination.
    bool truncated = false;

    bool done() const noexcept { return terminal || truncated; }
};

// Episodic environment. Episodes are pure functions of the reset seed and
// the action sequence. The base class owns step counting, truncation and
// the must-reset-after-done rule.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    const EnvSpec& spec() const noexcept { return spec_; }

    Observation reset(std::uint64_t seed);
    StepResult step(std::size_t action);

    std::size_t steps_taken() const noexcept { return steps_; }

    // Exact model, when the environment is tabular.
    virtual std::optional<TabularMDP> tabular() const { return std::nullopt; }
    // Tabular state index of the current state (tabular environments only).
    virtual std::size_t state_index() const { return 0; }

protected:
    explicit Environment(EnvSpec spec);

    struct Outcome {
        double reward = 0.0;
        bool terminal = false;
    };

    virtual void on_reset(std::uint64_t seed) = 0;
    virtual Outcome on_step(std::size_t action) = 0;
    virtual Observation observe() const = 0;

private:
    EnvSpec spec_;
    std::size_t steps_ = 0;
    bool needs_reset_ = true;
};

// Line of n states; reset places the agent at the left end. Actions:
// 0 = left (clamped at the wall), 1 = right. Entering the right end pays
// goal_reward and terminates; every other step pays step_reward.
// Observation: one-hot of the state.
class ChainMDP final : public Environment {
public:
    explicit ChainMDP(std::size_t n_states = 5, double step_reward = -0.01,
                      double goal_reward = 1.0, std::size_t max_episode_steps = 20);

    std::string name() const override { return "ChainMDP"; }
    std::optional<TabularMDP> tabular() const override;
    std::size_t state_index() const override { return position_; }

protected:
    void on_reset(std::uint64_t seed) override;
    Outcome on_step(std::size_t action) override;
    Observation observe() const override;

private:
    std::size_t n_states_;
    double step_reward_;
    double goal_reward_;
    std::size_t position_ = 0;
};

// Grid described by rows of characters:
//   'S' start, 'G' goal (+goal_reward, terminal), 'P' pit (pit_reward,
//   terminal), '#' wall, '.' free.
// Actions: 0 up, 1 right, 2 down, 3 left. Moves into walls or off the grid
// leave the agent in place. Non-terminal steps pay step_reward.
// Observation: one-hot over all cells (row-major).
class GridWorld final : public Environment {
public:
    explicit GridWorld(std::vector<std::string> layout = default_layout(),
                       std::size_t max_episode_steps = 50);

    static std::vector<std::string> default_layout();

    std::string name() const override { return "GridWorld"; }
    std::optional<TabularMDP> tabular() const override;
    std::size_t state_index() const override { return cell_; }

    static constexpr double step_reward = -0.01;
    static constexpr double goal_reward = 1.0;
    static constexpr double pit_reward = -1.0;

protected:
    void on_reset(std::uint64_t seed) override;
    Outcome on_step(std::size_t action) override;
    Observation observe() const override;

private:
    std::size_t move(std::size_t cell, std::size_t action) const;

    std::vector<std::string> layout_;
    std::size_t rows_;
    std::size_t cols_;
    std::size_t start_ = 0;
    std::size_t cell_ = 0;
};

// Three-lane corridor. The agent sits in the bottom row; obstacles scroll
// one row toward it per step. Each row holds at most one obstacle, spawned
// at the far end with probability spawn_probability in a uniformly chosen
// lane. Actions: 0 left, 1 stay, 2 right (clamped at the walls).
//
// A step first moves the agent, then scrolls: the nearest obstacle row
// reaches the agent row. Landing in the agent's lane is a collision
// (reward 0, terminal); otherwise the step pays +1.
//
// Observation: one-hot agent lane (3), then view_rows x 3 obstacle
// occupancy, nearest row first.
//
// With at most one obstacle per row there is always a safe reachable lane,
// so the optimal undiscounted return is exactly max_episode_steps.
class CorridorDodge final : public Environment {
public:
    explicit CorridorDodge(std::size_t view_rows = 3, double spawn_probability = 0.6,
                           std::size_t max_episode_steps = 50);

    static constexpr std::size_t kLanes = 3;
    static constexpr int kEmpty = -1;

    std::string name() const override { return "CorridorDodge"; }

    std::size_t agent_lane() const noexcept { return lane_; }
    // Obstacle lane per row, nearest first; kEmpty for an empty row.
    const std::vector<int>& obstacle_rows() const noexcept { return rows_; }

    // Dodge iff the nearest row blocks the current lane; prefers moving left.
    static std::size_t oracle_action(const Observation& observation);
    double oracle_return() const { return static_cast<double>(spec().max_episode_steps); }

protected:
    void on_reset(std::uint64_t seed) override;
    Outcome on_step(std::size_t action) override;
    Observation observe() const override;

private:
    int spawn_row();

    double spawn_probability_;
    std::size_t lane_ = 1;
    std::vector<int> rows_;
    Rng rng_{0};
};

// Registry of bundled environments by name.
std::vector<std::string> registered_environments();
std::unique_ptr<Environment> make_environment(const std::string& name);

// One recorded episode: per step the action, reward, terminal flag and a
// 64-bit FNV-1a hash of the resulting observation bytes.
struct EpisodeTrace {
    struct Step {
        std::size_t action = 0;
        double reward = 0.0;
        bool terminal = false;
        std::uint64_t observation_hash = 0;
        bool operator==(const Step&) const = default;
    };

    std::string env_name;
    std::uint64_t seed = 0;
    std::uint64_t reset_hash = 0;
    std::vector<Step> steps;

    bool operator==(const EpisodeTrace&) const = default;
};

std::uint64_t observation_hash(const Observation& observation);

using Policy = std::function<std::size_t(const Observation&)>;
EpisodeTrace record_episode(Environment& env, std::uint64_t seed, const Policy& policy);

// Text trace format, version 1:
//   medn-trace 1
//   env <name>
//   seed <seed>
//   reset <hash hex>
//   <action> <reward %.17g> <terminal 0|1> <hash hex>    (one line per step)
void write_trace(std::ostream& out, const EpisodeTrace& trace);
EpisodeTrace read_trace(std::istream& in);

} // namespace medn
