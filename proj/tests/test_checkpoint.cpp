#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "lgcf/checkpoint.hpp"
#include "lgcf/errors.hpp"
#include "test_support.hpp"

using namespace lgcf;

namespace {

CheckpointHeader header_for(const EmbeddingMatrix& e, std::uint64_t users) {
    return {users, e.rows() - users, static_cast<std::uint32_t>(e.dim()), 3, Mode::Tangent, 0xDEADBEEFCAFEull};
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / (std::string("lgcf_test_") + name);
}

}  // namespace

TEST(Crc32, KnownVector) {
    const char* text = "123456789";
    const std::span bytes(reinterpret_cast<const unsigned char*>(text), 9);
    EXPECT_EQ(crc32(bytes), 0xCBF43926u);
}

TEST(Checkpoint, LayoutAndBitExactRoundTrip) {
    Rng rng(1);
    const auto e = test_support::random_embeddings(7, 4, 3.0, rng);
    const auto h = header_for(e, 3);
    const auto bytes = encode_checkpoint(h, e);
    ASSERT_EQ(bytes.size(), kCheckpointHeaderBytes + 7 * 5 * 8 + 4);
    EXPECT_EQ(std::memcmp(bytes.data(), "LGCFCKPT", 8), 0);
    EXPECT_EQ(bytes[8], 1);
    EXPECT_EQ(bytes[36], 1);  // tangent

    const auto back = decode_checkpoint(bytes);
    EXPECT_EQ(back.header, h);
    EXPECT_EQ(back.embeddings, e);
    EXPECT_EQ(std::memcmp(back.embeddings.data().data(), e.data().data(), e.data().size() * 8), 0);
}

TEST(Checkpoint, FileRoundTrip) {
    Rng rng(2);
    const auto e = test_support::random_embeddings(5, 2, 1.0, rng);
    const auto path = temp_file("roundtrip.bin");
    save_checkpoint(path, header_for(e, 2), e);
    const auto back = load_checkpoint(path);
    EXPECT_EQ(back.embeddings, e);
    std::filesystem::remove(path);
}

TEST(Checkpoint, AnyFlippedByteIsDetected) {
    Rng rng(3);
    const auto e = test_support::random_embeddings(3, 2, 1.0, rng);
    const auto bytes = encode_checkpoint(header_for(e, 1), e);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        auto bad = bytes;
        bad[i] ^= 0x10;
        EXPECT_THROW(decode_checkpoint(bad), CheckpointError) << "byte " << i;
    }
}

TEST(Checkpoint, TruncationAndTrailingBytesAreDetected) {
    Rng rng(4);
    const auto e = test_support::random_embeddings(3, 2, 1.0, rng);
    const auto bytes = encode_checkpoint(header_for(e, 1), e);
    for (std::size_t n : {std::size_t{0}, std::size_t{10}, kCheckpointHeaderBytes, bytes.size() - 1}) {
        EXPECT_THROW(decode_checkpoint(std::span(bytes).first(n)), CheckpointError) << n;
    }
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_THROW(decode_checkpoint(longer), CheckpointError);
}

TEST(Checkpoint, OffManifoldPayloadIsRejected) {
    EmbeddingMatrix e(2, 2);
    e.row(0)[0] = 1.0;
    e.row(1)[0] = 1.0;
    e.row(1)[1] = 0.5;  // violates the constraint
    const auto bytes = encode_checkpoint(header_for(e, 1), e);
    EXPECT_THROW(decode_checkpoint(bytes), CheckpointError);
}

TEST(Checkpoint, MissingFileIsAnError) {
    EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.bin"), Error);
}
