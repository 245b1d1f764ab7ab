#include "medn/checkpoint.hpp"

#include <fstream>

#include "medn/binary_io.hpp"
#include "medn/errors.hpp"

namespace medn {
namespace {

constexpr char kMagic[] = "MEDNCKPT";
constexpr std::size_t kMagicSize = 8;
// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint32_t kMaxCount = 1u << 20;

std::uint32_t read_count(std::istream& in, const char* what) {
    const auto n = binary::read<std::uint32_t>(in, what);
    if (n > kMaxCount) {
        throw FormatError(std::string("checkpoint: implausible ") + what + " " + std::to_string(n));
    }
    return n;
}

} // namespace

void write_checkpoint(std::ostream& out, const QNetwork& network) {
    const NetworkSpec& spec = network.spec();
    binary::write_bytes(out, std::string(kMagic, kMagicSize));
    binary::write<std::uint32_t>(out, kCheckpointVersion);
    binary::write<std::uint32_t>(out, spec.architecture == Architecture::Dueling ? 1 : 0);
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(spec.aggregator));
    binary::write<std::uint64_t>(out, network.seed());
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(spec.input_dim));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(spec.action_count));
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(spec.hidden.size()));
    for (std::size_t width : spec.hidden) {
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(width));
    }
    binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(network.params().size()));
    for (const auto& [name, array] : network.params()) {
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        binary::write_bytes(out, name);
        binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(array.rank()));
        for (std::size_t d : array.shape()) {
            binary::write<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        }
        for (double v : array.data()) {
            binary::write<double>(out, v);
        }
    }
}

QNetwork read_checkpoint(std::istream& in) {
    const std::string magic = binary::read_bytes(in, kMagicSize, "magic");
    if (magic != std::string(kMagic, kMagicSize)) {
        throw FormatError("checkpoint: bad magic (not a medn checkpoint)");
    }
    const auto version = binary::read<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported format version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
    }
    NetworkSpec spec;
    const auto arch = binary::read<std::uint32_t>(in, "architecture");
    if (arch > 1) {
        throw FormatError("checkpoint: unknown architecture code " + std::to_string(arch));
    }
    spec.architecture = arch == 1 ? Architecture::Dueling : Architecture::SingleStream;
    const auto agg = binary::read<std::uint32_t>(in, "aggregator");
    if (agg > 2) {
        throw FormatError("checkpoint: unknown aggregator code " + std::to_string(agg));
    }
    spec.aggregator = static_cast<Aggregator>(agg);
    const auto seed = binary::read<std::uint64_t>(in, "seed");
    spec.input_dim = binary::read<std::uint32_t>(in, "input_dim");
    spec.action_count = binary::read<std::uint32_t>(in, "action_count");
    spec.hidden.resize(read_count(in, "hidden layer count"));
    for (auto& width : spec.hidden) {
        width = binary::read<std::uint32_t>(in, "hidden width");
    }
    ParamMap params;
    const auto arrays = read_count(in, "array count");
    for (std::uint32_t i = 0; i < arrays; ++i) {
        const auto name_len = read_count(in, "name length");
        std::string name = binary::read_bytes(in, name_len, "array name");
        Shape shape(read_count(in, "rank"));
        for (auto& d : shape) {
            d = read_count(in, "dimension");
        }
        std::vector<double> data(shape_size(shape));
        for (double& v : data) {
            v = binary::read<double>(in, "array data");
        }
        params.emplace(std::move(name), DenseArray(std::move(shape), std::move(data)));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("checkpoint: trailing bytes after last array");
    }
    try {
        return QNetwork(std::move(spec), std::move(params), seed);
    } catch (const ContractError& e) {
        throw FormatError(std::string("checkpoint: inconsistent contents: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const QNetwork& network) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_checkpoint(out, network);
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

QNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path.string() + "'");
    }
    return read_checkpoint(in);
}

} // namespace medn
