#pragma once

// Binary checkpoint layout (all integers and doubles little-endian):
//
//   offset  size  field
//   0       8     magic "LGCFCKPT"
//   8       4     u32 format version (1)
//   12      8     u64 n_users
//   20      8     u64 n_items
//   28      4     u32 d
//   32      4     u32 layers
//   36      1     u8 mode (0 = hyperbolic, 1 = tangent)
//   37      8     u64 seed
//   45      P     (n_users + n_items) * (d + 1) f64, row-major
//   45+P    4     u32 CRC-32 (zlib polynomial) over bytes [0, 45+P)

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lgcf/model.hpp"

namespace lgcf {

inline constexpr std::array<char, 8> kCheckpointMagic = {'L', 'G', 'C', 'F', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 45;

struct CheckpointHeader {
    std::uint64_t n_users = 0;
    std::uint64_t n_items = 0;
    std::uint32_t dim = 0;
    std::uint32_t layers = 0;
    Mode mode = Mode::Hyperbolic;
    std::uint64_t seed = 0;

    friend bool operator==(const CheckpointHeader&, const CheckpointHeader&) = default;
};

struct Checkpoint {
    CheckpointHeader header;
    EmbeddingMatrix embeddings;
};

std::vector<unsigned char> encode_checkpoint(const CheckpointHeader& header, const EmbeddingMatrix& embeddings);
/// Validates magic, version, sizes, checksum and the manifold constraint.
Checkpoint decode_checkpoint(std::span<const unsigned char> bytes);

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const EmbeddingMatrix& embeddings);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32(std::span<const unsigned char> bytes);

}  // namespace lgcf
