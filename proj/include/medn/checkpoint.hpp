#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "medn/network.hpp"

namespace medn {

// Binary network checkpoint, all integers little-endian:
//
//   bytes 0..7   magic "MEDNCKPT"
//   u32          format version (kCheckpointVersion)
//   u32          architecture (0 single, 1 dueling)
//   u32          aggregator (0 naive, 1 max, 2 mean)
//   u64          network seed
//   u32          input_dim
//   u32          action_count
//   u32          hidden layer count H, then H x u32 widths
//   u32          array count N, then N records of
//                  u32 name length, name bytes,
//                  u32 rank, rank x u32 dims,
//                  prod(dims) x f64 (IEEE-754 binary64, row-major)
//
// Arrays are written in sorted-name order; the byte stream is a pure function
// of the network, so save -> load -> save is byte-identical.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const QNetwork& network);
QNetwork read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const QNetwork& network);
QNetwork load_checkpoint(const std::filesystem::path& path);

} // namespace medn
