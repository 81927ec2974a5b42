#pragma once

// End-to-end driver shared by the command-line tool and the Python module.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lgcf/checkpoint.hpp"
#include "lgcf/dataset.hpp"
#include "lgcf/eval.hpp"
#include "lgcf/model.hpp"
#include "lgcf/optimizer.hpp"

namespace lgcf {

struct RunConfig {
    ModelConfig model;
    OptimConfig optim;
    std::filesystem::path data;
    std::filesystem::path out = "lgcf_out";
    std::vector<std::size_t> cutoffs = {10, 20};
    double test_fraction = 0.2;

    /// Throws ContractError / Error; checks that `data` exists when required.
    void validate(bool require_data = true) const;

    /// Applies one "key=value" setting; keys match the long flag names
    /// (dim, layers, lr, weight-decay, margin, epochs, batch-size, seed, mode,
    /// activation, k, data, out, test-fraction, init-sigma, per-layer-hinge).
    void set(std::string_view key, std::string_view value);

    /// Fully resolved key=value listing, one setting per line.
    std::string to_text() const;
};

/// Reads key=value lines ('#' comments, blank lines ignored) on top of `base`.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});
std::vector<std::size_t> parse_cutoffs(std::string_view list);

struct PreparedData {
    LoadedInteractions interactions;
    Split split;
    BipartiteGraph graph;
    std::uint32_t checksum = 0;  // CRC-32 of the raw data file
};

PreparedData prepare_data(const RunConfig& config);
PreparedData prepare_data(LoadedInteractions interactions, const RunConfig& config, std::uint32_t checksum = 0);

/// Seeds derived from the run seed for the independent random streams.
std::uint64_t init_seed(std::uint64_t seed);
std::uint64_t training_seed(std::uint64_t seed);

struct TrainOutcome {
    EmbeddingMatrix initial;
    EmbeddingMatrix embeddings;
    std::vector<double> epoch_losses;
    std::uint32_t init_hash = 0;
};

TrainOutcome run_training(const RunConfig& config, const PreparedData& data, const EpochCallback& on_epoch = {});
EvalReport run_evaluation(const RunConfig& config, const PreparedData& data, const EmbeddingMatrix& embeddings);

CheckpointHeader make_header(const RunConfig& config, const PreparedData& data);

// ---------------------------------------------------------------------------
// Commands. Each writes into config.out and logs progress to `log`.

struct TrainArtifacts {
    std::filesystem::path checkpoint;
    std::filesystem::path loss_csv;
    std::filesystem::path manifest;
    TrainOutcome outcome;
};

TrainArtifacts cmd_train(const RunConfig& config, std::ostream& log);
/// Recomputes the forward stack from the checkpoint; writes metrics.txt.
EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& log);
/// One train+eval per dimensionality; writes sweep.csv.
std::filesystem::path cmd_sweep(const RunConfig& config, const std::vector<std::size_t>& dims, std::ostream& log);
/// Hyperbolic vs tangent runs sharing seed, split and init; writes ablation.txt.
std::filesystem::path cmd_ablate(const RunConfig& config, std::ostream& log);

}  // namespace lgcf
