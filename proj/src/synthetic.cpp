#include "lgcf/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "lgcf/errors.hpp"

namespace lgcf {

namespace {

// Appends `count` distinct items drawn from [first, first + span).
void draw_from(std::size_t first, std::size_t span, std::size_t count, Rng& rng, std::vector<std::size_t>& out) {
    std::vector<std::size_t> pool(span);
    std::iota(pool.begin(), pool.end(), first);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(count, span));
    out.insert(out.end(), pool.begin(), pool.end());
}

}  // namespace

LoadedInteractions make_tree_benchmark(const TreeBenchmarkConfig& c, std::uint64_t seed) {
    const std::size_t leaves = c.clusters * c.subclusters;
    if (leaves == 0 || c.users == 0) throw ContractError("tree benchmark needs at least one leaf and one user");
    const std::size_t cluster_base = c.root_items;
    const std::size_t leaf_base = cluster_base + c.clusters * c.cluster_items;
    const std::size_t n_items = leaf_base + leaves * c.leaf_items;

    Rng rng(seed);
    std::vector<Interaction> pairs;
    std::vector<std::size_t> picked;
    for (std::size_t u = 0; u < c.users; ++u) {
        const std::size_t leaf = u % leaves;
        const std::size_t cluster = leaf / c.subclusters;
        picked.clear();
        draw_from(leaf_base + leaf * c.leaf_items, c.leaf_items, c.picks_leaf, rng, picked);
        draw_from(cluster_base + cluster * c.cluster_items, c.cluster_items, c.picks_cluster, rng, picked);
        draw_from(0, c.root_items, c.picks_root, rng, picked);
        draw_from(0, n_items, c.picks_noise, rng, picked);
        for (std::size_t item : picked) pairs.push_back({u, item});
    }

    IdMap ids;
    for (std::size_t u = 0; u < c.users; ++u) ids.users.push_back("u" + std::to_string(u));
    for (std::size_t i = 0; i < n_items; ++i) ids.items.push_back("i" + std::to_string(i));
    return {InteractionSet(c.users, n_items, std::move(pairs)), std::move(ids)};
}

}  // namespace lgcf
