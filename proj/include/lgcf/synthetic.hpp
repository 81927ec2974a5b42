#pragma once

#include <cstddef>
#include <cstdint>

#include "lgcf/dataset.hpp"

namespace lgcf {

/// Three-level hierarchy: a root, `clusters` top-level groups, each split
/// into `subclusters` leaf communities. Items live at one of the three
/// levels; users belong to a leaf and draw items from their leaf, their
/// cluster, and the root, plus a little uniform noise.
struct TreeBenchmarkConfig {
    std::size_t clusters = 4;
    std::size_t subclusters = 4;
    std::size_t users = 200;
    std::size_t root_items = 8;
    std::size_t cluster_items = 8;  // per cluster
    std::size_t leaf_items = 10;    // per leaf
    std::size_t picks_leaf = 6;
    std::size_t picks_cluster = 3;
    std::size_t picks_root = 1;
    std::size_t picks_noise = 1;
};

/// Ids are "u<k>" / "i<k>"; item indices are grouped root, clusters, leaves.
LoadedInteractions make_tree_benchmark(const TreeBenchmarkConfig& config, std::uint64_t seed);

}  // namespace lgcf
