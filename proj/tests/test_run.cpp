#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "lgcf/errors.hpp"
#include "lgcf/run.hpp"

namespace fs = std::filesystem;
using namespace lgcf;

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(LGCF_CLI_PATH) + " " + args + " 2>&1";
    CommandResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("lgcf_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        // 4 users x 4 items, every user with three items so the split holds one out.
        std::ofstream(dir_ / "toy.txt") << "# toy\n"
                                           "u0 i0\nu0 i1\nu0 i2\n"
                                           "u1 i1\nu1 i2\nu1 i3\n"
                                           "u2 i0\nu2 i2\nu2 i3\n"
                                           "u3 i0\nu3 i1\nu3 i3\n";
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string base(const std::string& out) const {
        return "--data " + (dir_ / "toy.txt").string() + " --out " + (dir_ / out).string() +
               " --dim 4 --layers 2 --epochs 5 --batch-size 4 --lr 0.01 --seed 7";
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, TrainWritesCheckpointLossAndManifest) {
    const auto r = run_cli("train " + base("a"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir_ / "a" / "checkpoint.bin"));
    const auto csv = read_file(dir_ / "a" / "loss.csv");
    EXPECT_EQ(csv.rfind("epoch,loss\n", 0), 0u);
    EXPECT_EQ(count_lines(csv), 6u);  // header + 5 epochs
    const auto manifest = read_file(dir_ / "a" / "manifest.txt");
    for (const char* key : {"seed=7", "dim=4", "layers=2", "data-crc32=", "init-hash="}) {
        EXPECT_NE(manifest.find(key), std::string::npos) << key;
    }
}

TEST_F(CliTest, SameSeedGivesByteIdenticalArtifacts) {
    ASSERT_EQ(run_cli("train " + base("a")).exit_code, 0);
    ASSERT_EQ(run_cli("train " + base("b")).exit_code, 0);
    EXPECT_EQ(read_file(dir_ / "a" / "checkpoint.bin"), read_file(dir_ / "b" / "checkpoint.bin"));
    EXPECT_EQ(read_file(dir_ / "a" / "loss.csv"), read_file(dir_ / "b" / "loss.csv"));

    const auto ea = run_cli("eval " + base("a") + " --checkpoint " + (dir_ / "a" / "checkpoint.bin").string());
    const auto eb = run_cli("eval " + base("b") + " --checkpoint " + (dir_ / "b" / "checkpoint.bin").string());
    ASSERT_EQ(ea.exit_code, 0) << ea.output;
    EXPECT_EQ(read_file(dir_ / "a" / "metrics.txt"), read_file(dir_ / "b" / "metrics.txt"));
}

TEST_F(CliTest, MissingDataFileNamesThePath) {
    const auto r = run_cli("train --data " + (dir_ / "nope.txt").string() + " --out " + (dir_ / "x").string());
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find((dir_ / "nope.txt").string()), std::string::npos) << r.output;
}

TEST_F(CliTest, BadFlagValueFails) {
    EXPECT_NE(run_cli("train " + base("a") + " --mode euclidean").exit_code, 0);
    EXPECT_NE(run_cli("train " + base("a") + " --dim 1").exit_code, 0);
    EXPECT_NE(run_cli("train " + base("a") + " --epochs many").exit_code, 0);
}

TEST_F(CliTest, EvalEmitsExactlyFourMetricKeys) {
    ASSERT_EQ(run_cli("train " + base("a")).exit_code, 0);
    const auto r = run_cli("eval " + base("a") + " --k 10,20 --checkpoint " + (dir_ / "a" / "checkpoint.bin").string());
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto metrics = read_file(dir_ / "a" / "metrics.txt");
    EXPECT_EQ(count_lines(metrics), 4u);
    for (const char* key : {"recall@10=", "recall@20=", "ndcg@10=", "ndcg@20="}) {
        EXPECT_NE(metrics.find(key), std::string::npos) << key;
        EXPECT_NE(r.output.find(key), std::string::npos) << key;
    }
}

TEST_F(CliTest, EvalRejectsCorruptedCheckpoint) {
    ASSERT_EQ(run_cli("train " + base("a")).exit_code, 0);
    const auto path = dir_ / "a" / "checkpoint.bin";
    auto bytes = read_file(path);
    bytes[bytes.size() - 1] ^= 0x01;
    std::ofstream(path, std::ios::binary) << bytes;
    const auto r = run_cli("eval " + base("a") + " --checkpoint " + path.string());
    EXPECT_NE(r.exit_code, 0);
}

TEST_F(CliTest, EvalRejectsMismatchedHeader) {
    ASSERT_EQ(run_cli("train " + base("a")).exit_code, 0);
    const auto r = run_cli("eval " + base("a") + " --dim 6 --checkpoint " + (dir_ / "a" / "checkpoint.bin").string());
    EXPECT_NE(r.exit_code, 0);
}

TEST_F(CliTest, SweepWritesOneRowPerDimension) {
    const auto r = run_cli("sweep " + base("s") + " --dims 8,16");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto csv = read_file(dir_ / "s" / "sweep.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dim,recall@10,recall@20,ndcg@10,ndcg@20");
    EXPECT_EQ(count_lines(csv), 3u);
    EXPECT_EQ(csv.find("\n8,") != std::string::npos && csv.find("\n16,") != std::string::npos, true);

    ASSERT_EQ(run_cli("sweep " + base("t") + " --dims 8,16").exit_code, 0);
    EXPECT_EQ(read_file(dir_ / "t" / "sweep.csv"), csv);
}

TEST_F(CliTest, AblateReportsTwoBlocksWithSharedInit) {
    const auto r = run_cli("ablate " + base("ab"));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto text = read_file(dir_ / "ab" / "ablation.txt");
    EXPECT_NE(text.find("[hyperbolic]"), std::string::npos);
    EXPECT_NE(text.find("[tangent]"), std::string::npos);
    std::size_t blocks = 0;
    for (std::size_t p = text.find('['); p != std::string::npos; p = text.find('[', p + 1)) ++blocks;
    EXPECT_EQ(blocks, 2u);

    std::vector<std::string> hashes;
    for (std::size_t p = text.find("init-hash="); p != std::string::npos; p = text.find("init-hash=", p + 1)) {
        hashes.push_back(text.substr(p, text.find('\n', p) - p));
    }
    ASSERT_EQ(hashes.size(), 2u);
    EXPECT_EQ(hashes[0], hashes[1]);
}

TEST_F(CliTest, ConfigFileWithFlagOverrides) {
    std::ofstream(dir_ / "run.cfg") << "# run settings\n"
                                       "data=" << (dir_ / "toy.txt").string() << "\n"
                                       "out=" << (dir_ / "cfg").string() << "\n"
                                       "dim=3\nlayers=1\nepochs=2\nbatch-size=4\nseed=3\n";
    const auto r = run_cli("train --config " + (dir_ / "run.cfg").string() + " --epochs 3");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(count_lines(read_file(dir_ / "cfg" / "loss.csv")), 4u);
    const auto manifest = read_file(dir_ / "cfg" / "manifest.txt");
    EXPECT_NE(manifest.find("dim=3\n"), std::string::npos);
    EXPECT_NE(manifest.find("epochs=3\n"), std::string::npos);
}

TEST_F(CliTest, GenerateWritesLoadableBenchmark) {
    const auto path = dir_ / "tree.txt";
    const auto r = run_cli("generate --out " + path.string() + " --seed 1");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const auto data = load_interactions(path);
    EXPECT_EQ(data.set.n_users(), 200u);
    EXPECT_EQ(data.set.n_items(), 200u);
}

TEST(RunConfig, SetAndRoundTripText) {
    RunConfig c;
    c.set("dim", "12");
    c.set("mode", "tangent");
    c.set("k", "5,10");
    c.set("per-layer-hinge", "true");
    EXPECT_EQ(c.model.dim, 12u);
    EXPECT_EQ(c.model.mode, Mode::Tangent);
    EXPECT_EQ(c.cutoffs, (std::vector<std::size_t>{5, 10}));
    EXPECT_TRUE(c.model.per_layer_hinge);
    EXPECT_THROW(c.set("colour", "blue"), Error);
    EXPECT_THROW(c.set("lr", "fast"), Error);

    const auto path = fs::temp_directory_path() / "lgcf_roundtrip.cfg";
    std::ofstream(path) << c.to_text();
    const auto back = load_run_config(path);
    EXPECT_EQ(back.to_text(), c.to_text());
    fs::remove(path);
}

TEST(RunConfig, DefaultsMirrorReferenceSettings) {
    const RunConfig c;
    EXPECT_EQ(c.model.dim, 50u);
    EXPECT_EQ(c.model.layers, 3u);
    EXPECT_EQ(c.optim.lr, 0.001);
    EXPECT_EQ(c.optim.weight_decay, 0.005);
    EXPECT_EQ(c.optim.epochs, 1000u);
    EXPECT_EQ(c.model.margin, 0.5);
    EXPECT_EQ(c.cutoffs, (std::vector<std::size_t>{10, 20}));
}

TEST(RunConfig, ParseCutoffs) {
    EXPECT_EQ(parse_cutoffs("10,20"), (std::vector<std::size_t>{10, 20}));
    EXPECT_THROW(parse_cutoffs(""), Error);
    EXPECT_THROW(parse_cutoffs("10,,20"), Error);
    EXPECT_THROW(parse_cutoffs("0"), Error);
}

TEST(RunSeeds, StreamsAreDistinctAndStable) {
    EXPECT_NE(init_seed(1), training_seed(1));
    EXPECT_EQ(init_seed(1), init_seed(1));
    EXPECT_NE(init_seed(1), init_seed(2));
}
