#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "medn/losses.hpp"
#include "medn/rng.hpp"

namespace medn {

struct Transition {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    // True environment termination only; time-limit truncation is stored as
    // non-terminal so the target bootstraps through it.
    bool terminal = false;

    bool operator==(const Transition&) const = default;
};

// Fixed-capacity FIFO ring of transitions with seeded uniform sampling
// (with replacement).
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t observation_dim, std::size_t action_count,
                 std::uint64_t seed);

    void push(Transition t);

    // Throws NotReadyError while size() < batch_size.
    TDBatch sample(std::size_t batch_size, double gamma);

    std::size_t size() const noexcept { return storage_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::uint64_t insert_count() const noexcept { return insert_count_; }
    std::size_t observation_dim() const noexcept { return observation_dim_; }
    std::size_t action_count() const noexcept { return action_count_; }

    // i-th stored transition, oldest first.
    const Transition& at(std::size_t i) const;

    // Debug trace:
    //   magic "MEDNRPLY", u32 version, u64 capacity, u64 observation_dim,
    //   u64 action_count, u64 insert_count, u64 stored count, then per
    //   transition (oldest first): obs_dim x f64 state, u32 action, f64 reward,
    //   obs_dim x f64 next_state, u8 terminal. Little-endian.
    void dump(std::ostream& out) const;
    void dump(const std::filesystem::path& path) const;
    // Reads a trace back as a transition list (oldest first).
    static std::vector<Transition> read_trace(std::istream& in);

private:
    std::size_t capacity_;
    std::size_t observation_dim_;
    std::size_t action_count_;
    std::vector<Transition> storage_;
    std::size_t head_ = 0;  // slot of the oldest entry once full
    std::uint64_t insert_count_ = 0;
    Rng rng_;
};

} // namespace medn
