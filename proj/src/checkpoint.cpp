#include "lgcf/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "lgcf/errors.hpp"

namespace lgcf {

namespace {

constexpr double kLoadTolerance = 1e-9;

void put_u(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

std::uint64_t get_u(std::span<const unsigned char> in, std::size_t offset, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(in[offset + b]) << (8 * b);
    return v;
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
        crc = ::crc32(crc, bytes.data() + offset, chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<unsigned char> encode_checkpoint(const CheckpointHeader& header, const EmbeddingMatrix& embeddings) {
    if (embeddings.rows() != header.n_users + header.n_items || embeddings.dim() != header.dim) {
        throw CheckpointError("checkpoint header does not describe the embedding table");
    }
    std::vector<unsigned char> out;
    out.reserve(kCheckpointHeaderBytes + embeddings.data().size() * 8 + 4);
    for (char c : kCheckpointMagic) out.push_back(static_cast<unsigned char>(c));
    put_u(out, kCheckpointVersion, 4);
    put_u(out, header.n_users, 8);
    put_u(out, header.n_items, 8);
    put_u(out, header.dim, 4);
    put_u(out, header.layers, 4);
    put_u(out, header.mode == Mode::Tangent ? 1 : 0, 1);
    put_u(out, header.seed, 8);
    for (double v : embeddings.data()) put_u(out, std::bit_cast<std::uint64_t>(v), 8);
    put_u(out, crc32(out), 4);
    return out;
}

Checkpoint decode_checkpoint(std::span<const unsigned char> bytes) {
    if (bytes.size() < kCheckpointHeaderBytes + 4) throw CheckpointError("checkpoint truncated");
    if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin())) {
        throw CheckpointError("not a checkpoint (bad magic)");
    }
    const auto version = static_cast<std::uint32_t>(get_u(bytes, 8, 4));
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ck;
    auto& h = ck.header;
    h.n_users = get_u(bytes, 12, 8);
    h.n_items = get_u(bytes, 20, 8);
    h.dim = static_cast<std::uint32_t>(get_u(bytes, 28, 4));
    h.layers = static_cast<std::uint32_t>(get_u(bytes, 32, 4));
    const auto mode = bytes[36];
    if (mode > 1) throw CheckpointError("invalid mode byte in checkpoint");
    h.mode = mode == 1 ? Mode::Tangent : Mode::Hyperbolic;
    h.seed = get_u(bytes, 37, 8);

    const std::uint64_t rows = h.n_users + h.n_items;
    const std::uint64_t values = rows * (static_cast<std::uint64_t>(h.dim) + 1);
    if (h.dim < 1 || bytes.size() != kCheckpointHeaderBytes + values * 8 + 4) {
        throw CheckpointError("checkpoint payload length does not match its header");
    }
    const std::size_t body = bytes.size() - 4;
    const auto stored = static_cast<std::uint32_t>(get_u(bytes, body, 4));
    if (stored != crc32(bytes.first(body))) throw CheckpointError("checkpoint checksum mismatch");

    std::vector<double> data(values);
    for (std::size_t k = 0; k < values; ++k) {
        data[k] = std::bit_cast<double>(get_u(bytes, kCheckpointHeaderBytes + 8 * k, 8));
    }
    ck.embeddings = EmbeddingMatrix(rows, h.dim, std::move(data));
    for (std::size_t r = 0; r < rows; ++r) {
        auto x = ck.embeddings.row(r);
        const double violation = std::abs(geometry::lorentz_inner(x, x) + 1.0);
        if (!(x[0] > 0.0) || !(violation <= kLoadTolerance)) {
            throw CheckpointError("checkpoint row " + std::to_string(r) + " is off the hyperboloid");
        }
    }
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const EmbeddingMatrix& embeddings) {
    const auto bytes = encode_checkpoint(header, embeddings);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("short write on checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace lgcf
