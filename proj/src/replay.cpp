#include "medn/replay.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "medn/binary_io.hpp"
#include "medn/errors.hpp"

namespace medn {
namespace {

constexpr char kTraceMagic[] = "MEDNRPLY";
constexpr std::uint32_t kTraceVersion = 1;

} // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t observation_dim,
                           std::size_t action_count, std::uint64_t seed)
    : capacity_(capacity), observation_dim_(observation_dim), action_count_(action_count),
      rng_(seed) {
    if (capacity == 0) {
        throw ContractError("replay: capacity must be positive");
    }
    if (observation_dim == 0 || action_count == 0) {
        throw ContractError("replay: observation_dim and action_count must be positive");
    }
    storage_.reserve(std::min<std::size_t>(capacity, 1u << 16));
}

void ReplayBuffer::push(Transition t) {
    if (t.action >= action_count_) {
        throw ContractError("replay: action " + std::to_string(t.action) + " out of range for " +
                            std::to_string(action_count_) + " actions");
    }
    if (t.state.size() != observation_dim_ || t.next_state.size() != observation_dim_) {
        throw DimensionError("replay: transition observations have sizes " +
                             std::to_string(t.state.size()) + "/" +
                             std::to_string(t.next_state.size()) + ", buffer expects " +
                             std::to_string(observation_dim_));
    }
    if (!std::isfinite(t.reward)) {
        throw ContractError("replay: reward is not finite");
    }
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[head_] = std::move(t);
        head_ = (head_ + 1) % capacity_;
    }
    ++insert_count_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= storage_.size()) {
        throw ContractError("replay: index " + std::to_string(i) + " out of range");
    }
    return storage_[(head_ + i) % storage_.size()];
}

TDBatch ReplayBuffer::sample(std::size_t batch_size, double gamma) {
    if (batch_size == 0) {
        throw ContractError("replay: batch_size must be positive");
    }
    if (storage_.size() < batch_size) {
        throw NotReadyError("replay: " + std::to_string(storage_.size()) +
                            " transitions stored, batch of " + std::to_string(batch_size) +
                            " requested");
    }
    TDBatch batch;
    batch.gamma = gamma;
    batch.states = DenseArray({batch_size, observation_dim_});
    batch.next_states = DenseArray({batch_size, observation_dim_});
    batch.actions.resize(batch_size);
    batch.rewards.resize(batch_size);
    batch.terminal.resize(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const Transition& t = storage_[rng_.index(storage_.size())];
        std::copy(t.state.begin(), t.state.end(), &batch.states[i * observation_dim_]);
        std::copy(t.next_state.begin(), t.next_state.end(),
                  &batch.next_states[i * observation_dim_]);
        batch.actions[i] = t.action;
        batch.rewards[i] = t.reward;
        batch.terminal[i] = t.terminal ? 1 : 0;
    }
    return batch;
}

void ReplayBuffer::dump(std::ostream& out) const {
    binary::write_bytes(out, std::string(kTraceMagic, 8));
    binary::write<std::uint32_t>(out, kTraceVersion);
    binary::write<std::uint64_t>(out, capacity_);
    binary::write<std::uint64_t>(out, observation_dim_);
    binary::write<std::uint64_t>(out, action_count_);
    binary::write<std::uint64_t>(out, insert_count_);
    binary::write<std::uint64_t>(out, storage_.size());
    for (std::size_t i = 0; i < storage_.size(); ++i) {
        const Transition& t = at(i);
        for (double v : t.state) {
            binary::write<double>(out, v);
        }
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(t.action));
        binary::write<double>(out, t.reward);
        for (double v : t.next_state) {
            binary::write<double>(out, v);
        }
        binary::write<std::uint8_t>(out, t.terminal ? 1 : 0);
    }
}

void ReplayBuffer::dump(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    dump(out);
}

std::vector<Transition> ReplayBuffer::read_trace(std::istream& in) {
    if (binary::read_bytes(in, 8, "magic") != std::string(kTraceMagic, 8)) {
        throw FormatError("replay trace: bad magic");
    }
    const auto version = binary::read<std::uint32_t>(in, "version");
    if (version != kTraceVersion) {
        throw FormatError("replay trace: unsupported version " + std::to_string(version));
    }
    binary::read<std::uint64_t>(in, "capacity");
    const auto dim = binary::read<std::uint64_t>(in, "observation_dim");
    binary::read<std::uint64_t>(in, "action_count");
    binary::read<std::uint64_t>(in, "insert_count");
    const auto count = binary::read<std::uint64_t>(in, "count");
    if (dim > (1u << 24) || count > (1u << 28)) {
        throw FormatError("replay trace: implausible header");
    }
    std::vector<Transition> out(count);
    for (auto& t : out) {
        t.state.resize(dim);
        for (double& v : t.state) {
            v = binary::read<double>(in, "state");
        }
        t.action = binary::read<std::uint32_t>(in, "action");
        t.reward = binary::read<double>(in, "reward");
        t.next_state.resize(dim);
        for (double& v : t.next_state) {
            v = binary::read<double>(in, "next_state");
        }
        t.terminal = binary::read<std::uint8_t>(in, "terminal") != 0;
    }
    return out;
}

} // namespace medn
