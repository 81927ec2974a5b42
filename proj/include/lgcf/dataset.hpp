#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lgcf/geometry.hpp"

namespace lgcf {

struct Interaction {
    std::size_t user = 0;
    std::size_t item = 0;

    friend bool operator==(const Interaction&, const Interaction&) = default;
    friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

/// Binary implicit-feedback matrix stored as a deduplicated pair list.
/// Pair order is preserved from construction (first occurrence wins).
class InteractionSet {
public:
    InteractionSet() = default;
    /// Drops duplicates; throws ContractError on out-of-range indices.
    InteractionSet(std::size_t n_users, std::size_t n_items, std::vector<Interaction> pairs);

    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t n_items() const noexcept { return n_items_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    std::span<const Interaction> pairs() const noexcept { return pairs_; }

    /// Items of a user, sorted ascending.
    std::span<const std::size_t> items_of(std::size_t user) const;
    bool contains(std::size_t user, std::size_t item) const;

private:
    std::size_t n_users_ = 0;
    std::size_t n_items_ = 0;
    std::vector<Interaction> pairs_;
    std::vector<std::size_t> user_offsets_;
    std::vector<std::size_t> user_items_;
};

/// Raw ids in dense-index order.
struct IdMap {
    std::vector<std::string> users;
    std::vector<std::string> items;
};

struct LoadedInteractions {
    InteractionSet set;
    IdMap ids;
};

/// Reads "user item" lines (whitespace separated, '#' comments). Ids are
/// mapped to dense indices in first-appearance order.
LoadedInteractions load_interactions(std::istream& in);
LoadedInteractions load_interactions(const std::filesystem::path& path);

/// Writes pairs in stored order; reloading reproduces identical indices.
void write_interactions(std::ostream& out, const InteractionSet& set, const IdMap& ids);

struct Split {
    InteractionSet train;
    InteractionSet test;
    std::uint64_t seed = 0;
};

/// Per-user random split. A user with degree >= 2 sends ceil(f * deg) pairs
/// to test (at most deg - 1); users with a single interaction stay in train.
Split split_train_test(const InteractionSet& set, double test_fraction, std::uint64_t seed);

/// Self-inclusive user/item adjacency in CSR form. Users occupy nodes
/// [0, n_users), items [n_users, n_users + n_items).
class BipartiteGraph {
public:
    BipartiteGraph() = default;
    BipartiteGraph(std::size_t n_users, std::size_t n_items, std::vector<std::size_t> offsets,
                   std::vector<std::size_t> neighbors);

    std::size_t n_users() const noexcept { return n_users_; }
    std::size_t n_items() const noexcept { return n_items_; }
    std::size_t node_count() const noexcept { return n_users_ + n_items_; }
    std::size_t item_node(std::size_t item) const noexcept { return n_users_ + item; }

    /// N(i) including i itself, sorted ascending.
    std::span<const std::size_t> neighbors(std::size_t node) const;
    std::span<const std::size_t> offsets() const noexcept { return offsets_; }
    std::span<const std::size_t> neighbor_array() const noexcept { return neighbors_; }

private:
    std::size_t n_users_ = 0;
    std::size_t n_items_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbors_;
};

BipartiteGraph build_graph(const InteractionSet& train);

/// Uniform draw over items the user has not interacted with in `train`.
/// Throws ContractError if the user has interacted with every item.
std::size_t sample_negative(std::size_t user, const InteractionSet& train, Rng& rng);

}  // namespace lgcf
