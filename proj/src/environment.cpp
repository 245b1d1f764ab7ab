#include "medn/environment.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "medn/errors.hpp"

namespace medn {

Environment::Environment(EnvSpec spec) : spec_(spec) {
    if (spec_.action_count < 2) {
        throw ContractError("environment: action_count must be at least 2");
    }
    if (spec_.max_episode_steps < 1) {
        throw ContractError("environment: max_episode_steps must be at least 1");
    }
}

Observation Environment::reset(std::uint64_t seed) {
    on_reset(seed);
    steps_ = 0;
    needs_reset_ = false;
    return observe();
}

StepResult Environment::step(std::size_t action) {
    if (needs_reset_) {
        throw ContractError(name() + ": step called on a finished or unstarted episode; reset first");
    }
    if (action >= spec_.action_count) {
        throw ContractError(name() + ": action " + std::to_string(action) + " out of range for " +
                            std::to_string(spec_.action_count) + " actions");
    }
    const Outcome t = on_step(action);
    ++steps_;
    StepResult result;
    result.observation = observe();
    result.reward = t.reward;
    result.terminal = t.terminal;
    result.truncated = !t.terminal && steps_ >= spec_.max_episode_steps;
    needs_reset_ = result.done();
    return result;
}

// ---------------------------------------------------------------- ChainMDP

ChainMDP::ChainMDP(std::size_t n_states, double step_reward, double goal_reward,
                   std::size_t max_episode_steps)
    : Environment(EnvSpec{n_states, 2, max_episode_steps, 0.99}),
      n_states_(n_states), step_reward_(step_reward), goal_reward_(goal_reward) {
    if (n_states < 2) {
        throw ContractError("ChainMDP: needs at least 2 states");
    }
}

void ChainMDP::on_reset(std::uint64_t) {
    position_ = 0;
}

Environment::Outcome ChainMDP::on_step(std::size_t action) {
    if (action == 0) {
        position_ = position_ == 0 ? 0 : position_ - 1;
    } else {
        ++position_;
    }
    if (position_ == n_states_ - 1) {
        return {goal_reward_, true};
    }
    return {step_reward_, false};
}

Observation ChainMDP::observe() const {
    Observation obs(n_states_, 0.0);
    obs[position_] = 1.0;
    return obs;
}

std::optional<TabularMDP> ChainMDP::tabular() const {
    TabularMDP mdp;
    mdp.n_states = n_states_;
    mdp.n_actions = 2;
    mdp.transition.assign(n_states_ * 2 * n_states_, 0.0);
    mdp.reward.assign(n_states_ * 2, 0.0);
    mdp.terminal.assign(n_states_, false);
    mdp.terminal[n_states_ - 1] = true;
    for (std::size_t s = 0; s < n_states_; ++s) {
        for (std::size_t a = 0; a < 2; ++a) {
            std::size_t next = s;
            double reward = 0.0;
            if (s != n_states_ - 1) {
                next = a == 0 ? (s == 0 ? 0 : s - 1) : s + 1;
                reward = next == n_states_ - 1 ? goal_reward_ : step_reward_;
            }
            mdp.transition[(s * 2 + a) * n_states_ + next] = 1.0;
            mdp.reward[s * 2 + a] = reward;
        }
    }
    return mdp;
}

// --------------------------------------------------------------- GridWorld

namespace {

EnvSpec grid_spec(const std::vector<std::string>& layout, std::size_t max_episode_steps) {
    if (layout.empty() || layout.front().empty()) {
        throw ContractError("GridWorld: empty layout");
    }
    return EnvSpec{layout.size() * layout.front().size(), 4, max_episode_steps, 0.99};
}

} // namespace

std::vector<std::string> GridWorld::default_layout() {
    return {
        "S...",
        ".#.P",
        ".#..",
        "...G",
    };
}

GridWorld::GridWorld(std::vector<std::string> layout, std::size_t max_episode_steps)
    : Environment(grid_spec(layout, max_episode_steps)), layout_(std::move(layout)),
      rows_(layout_.size()), cols_(layout_.front().size()) {
    std::size_t starts = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
        if (layout_[r].size() != cols_) {
            throw ContractError("GridWorld: ragged layout");
        }
        for (std::size_t c = 0; c < cols_; ++c) {
            const char ch = layout_[r][c];
            if (std::strchr("SGP#.", ch) == nullptr) {
                throw ContractError(std::string("GridWorld: unknown cell '") + ch + "'");
            }
            if (ch == 'S') {
                start_ = r * cols_ + c;
                ++starts;
            }
        }
    }
    if (starts != 1) {
        throw ContractError("GridWorld: layout needs exactly one 'S'");
    }
}

std::size_t GridWorld::move(std::size_t cell, std::size_t action) const {
    const std::size_t r = cell / cols_;
    const std::size_t c = cell % cols_;
    std::size_t nr = r;
    std::size_t nc = c;
    switch (action) {
    case 0:
        nr = r == 0 ? r : r - 1;
        break;
    case 1:
        nc = c + 1 == cols_ ? c : c + 1;
        break;
    case 2:
        nr = r + 1 == rows_ ? r : r + 1;
        break;
    default:
        nc = c == 0 ? c : c - 1;
        break;
    }
    if (layout_[nr][nc] == '#') {
        return cell;
    }
    return nr * cols_ + nc;
}

void GridWorld::on_reset(std::uint64_t) {
    cell_ = start_;
}

Environment::Outcome GridWorld::on_step(std::size_t action) {
    cell_ = move(cell_, action);
    switch (layout_[cell_ / cols_][cell_ % cols_]) {
    case 'G':
        return {goal_reward, true};
    case 'P':
        return {pit_reward, true};
    default:
        return {step_reward, false};
    }
}

Observation GridWorld::observe() const {
    Observation obs(rows_ * cols_, 0.0);
    obs[cell_] = 1.0;
    return obs;
}

std::optional<TabularMDP> GridWorld::tabular() const {
    TabularMDP mdp;
    const std::size_t n = rows_ * cols_;
    mdp.n_states = n;
    mdp.n_actions = 4;
    mdp.transition.assign(n * 4 * n, 0.0);
    mdp.reward.assign(n * 4, 0.0);
    mdp.terminal.assign(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        const char here = layout_[s / cols_][s % cols_];
        mdp.terminal[s] = here == 'G' || here == 'P';
        for (std::size_t a = 0; a < 4; ++a) {
            std::size_t next = s;
            double reward = 0.0;
            if (!mdp.terminal[s] && here != '#') {
                next = move(s, a);
                const char there = layout_[next / cols_][next % cols_];
                reward = there == 'G' ? goal_reward : there == 'P' ? pit_reward : step_reward;
            }
            mdp.transition[(s * 4 + a) * n + next] = 1.0;
            mdp.reward[s * 4 + a] = reward;
        }
    }
    return mdp;
}

// ----------------------------------------------------------- CorridorDodge

CorridorDodge::CorridorDodge(std::size_t view_rows, double spawn_probability,
                             std::size_t max_episode_steps)
    : Environment(EnvSpec{kLanes + view_rows * kLanes, kLanes, max_episode_steps, 0.99}),
      spawn_probability_(spawn_probability), rows_(view_rows, kEmpty) {
    if (view_rows < 1) {
        throw ContractError("CorridorDodge: view_rows must be at least 1");
    }
    if (!(spawn_probability >= 0.0 && spawn_probability <= 1.0)) {
        throw ContractError("CorridorDodge: spawn_probability must lie in [0, 1]");
    }
}

int CorridorDodge::spawn_row() {
    // Both draws happen every time so the layout stream is independent of
    // the outcome of the first.
    const bool spawn = rng_.bernoulli(spawn_probability_);
    const int lane = static_cast<int>(rng_.index(kLanes));
    return spawn ? lane : kEmpty;
}

void CorridorDodge::on_reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    lane_ = 1;
    for (int& row : rows_) {
        row = spawn_row();
    }
}

Environment::Outcome CorridorDodge::on_step(std::size_t action) {
    if (action == 0 && lane_ > 0) {
        --lane_;
    } else if (action == 2 && lane_ + 1 < kLanes) {
        ++lane_;
    }
    const int arriving = rows_.front();
    std::rotate(rows_.begin(), rows_.begin() + 1, rows_.end());
    rows_.back() = spawn_row();
    if (arriving == static_cast<int>(lane_)) {
        return {0.0, true};
    }
    return {1.0, false};
}

Observation CorridorDodge::observe() const {
    Observation obs(spec().observation_dim, 0.0);
    obs[lane_] = 1.0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r] != kEmpty) {
            obs[kLanes + r * kLanes + static_cast<std::size_t>(rows_[r])] = 1.0;
        }
    }
    return obs;
}

std::size_t CorridorDodge::oracle_action(const Observation& observation) {
    std::size_t lane = 0;
    while (lane < kLanes && observation[lane] != 1.0) {
        ++lane;
    }
    if (lane == kLanes || observation.size() < 2 * kLanes) {
        throw ContractError("CorridorDodge::oracle_action: not a corridor observation");
    }
    const bool blocked = observation[kLanes + lane] == 1.0;
    if (!blocked) {
        return 1;
    }
    return lane > 0 ? 0 : 2;
}

// ---------------------------------------------------------------- registry

std::vector<std::string> registered_environments() {
    return {"ChainMDP", "CorridorDodge", "GridWorld"};
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
    if (name == "ChainMDP") {
        return std::make_unique<ChainMDP>();
    }
    if (name == "GridWorld") {
        return std::make_unique<GridWorld>();
    }
    if (name == "CorridorDodge") {
        return std::make_unique<CorridorDodge>();
    }
    std::string known;
    for (const auto& n : registered_environments()) {
        known += known.empty() ? n : ", " + n;
    }
    throw ContractError("unknown environment '" + name + "' (registered: " + known + ")");
}

// ------------------------------------------------------------------ traces

std::uint64_t observation_hash(const Observation& observation) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : observation) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int shift = 0; shift < 64; shift += 8) {
            h ^= (bits >> shift) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

EpisodeTrace record_episode(Environment& env, std::uint64_t seed, const Policy& policy) {
    EpisodeTrace trace;
    trace.env_name = env.name();
    trace.seed = seed;
    Observation obs = env.reset(seed);
    trace.reset_hash = observation_hash(obs);
    for (;;) {
        const std::size_t action = policy(obs);
        StepResult r = env.step(action);
        trace.steps.push_back({action, r.reward, r.terminal, observation_hash(r.observation)});
        obs = std::move(r.observation);
        if (r.done()) {
            break;
        }
    }
    return trace;
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 16);
    if (used != s.size()) {
        throw FormatError("trace: bad hash '" + s + "'");
    }
    return v;
}

} // namespace

void write_trace(std::ostream& out, const EpisodeTrace& trace) {
    out << "medn-trace 1\n";
    out << "env " << trace.env_name << '\n';
    out << "seed " << trace.seed << '\n';
    out << "reset " << hex64(trace.reset_hash) << '\n';
    char reward[64];
    for (const auto& s : trace.steps) {
        std::snprintf(reward, sizeof reward, "%.17g", s.reward);
        out << s.action << ' ' << reward << ' ' << (s.terminal ? 1 : 0) << ' '
            << hex64(s.observation_hash) << '\n';
    }
}

EpisodeTrace read_trace(std::istream& in) {
    EpisodeTrace trace;
    std::string key;
    int version = 0;
    if (!(in >> key >> version) || key != "medn-trace") {
        throw FormatError("trace: missing 'medn-trace' header");
    }
    if (version != 1) {
        throw FormatError("trace: unsupported version " + std::to_string(version));
    }
    std::string hash;
    if (!(in >> key >> trace.env_name) || key != "env" || !(in >> key >> trace.seed) ||
        key != "seed" || !(in >> key >> hash) || key != "reset") {
        throw FormatError("trace: malformed header");
    }
    trace.reset_hash = parse_hex64(hash);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        EpisodeTrace::Step s;
        int terminal = 0;
        if (!(fields >> s.action >> s.reward >> terminal >> hash)) {
            throw FormatError("trace: malformed step line '" + line + "'");
        }
        s.terminal = terminal != 0;
        s.observation_hash = parse_hex64(hash);
        trace.steps.push_back(s);
    }
    return trace;
}

} // namespace medn
