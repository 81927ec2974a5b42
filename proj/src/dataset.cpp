#include "lgcf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "lgcf/errors.hpp"

namespace lgcf {

namespace {

struct InteractionHash {
    std::size_t operator()(const Interaction& p) const noexcept {
        return std::hash<std::size_t>{}(p.user * 0x9E3779B97F4A7C15ULL ^ (p.item + 0x632BE59BD9B4E019ULL));
    }
};

std::size_t intern(std::unordered_map<std::string, std::size_t>& index, std::vector<std::string>& names,
                   const std::string& id) {
    auto [it, inserted] = index.try_emplace(id, names.size());
    if (inserted) names.push_back(id);
    return it->second;
}

}  // namespace

InteractionSet::InteractionSet(std::size_t n_users, std::size_t n_items, std::vector<Interaction> pairs)
    : n_users_(n_users), n_items_(n_items) {
    std::unordered_set<Interaction, InteractionHash> seen;
    seen.reserve(pairs.size());
    pairs_.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (p.user >= n_users || p.item >= n_items) {
            throw ContractError("interaction (" + std::to_string(p.user) + ", " + std::to_string(p.item) +
                                ") out of range for " + std::to_string(n_users) + " users x " +
                                std::to_string(n_items) + " items");
        }
        if (seen.insert(p).second) pairs_.push_back(p);
    }

    user_offsets_.assign(n_users + 1, 0);
    for (const auto& p : pairs_) ++user_offsets_[p.user + 1];
    for (std::size_t u = 0; u < n_users; ++u) user_offsets_[u + 1] += user_offsets_[u];
    user_items_.resize(pairs_.size());
    std::vector<std::size_t> cursor(user_offsets_.begin(), user_offsets_.end() - 1);
    for (const auto& p : pairs_) user_items_[cursor[p.user]++] = p.item;
    for (std::size_t u = 0; u < n_users; ++u) {
        std::sort(user_items_.begin() + static_cast<std::ptrdiff_t>(user_offsets_[u]),
                  user_items_.begin() + static_cast<std::ptrdiff_t>(user_offsets_[u + 1]));
    }
}

std::span<const std::size_t> InteractionSet::items_of(std::size_t user) const {
    if (user >= n_users_) throw ContractError("user index " + std::to_string(user) + " out of range");
    return std::span<const std::size_t>(user_items_).subspan(user_offsets_[user],
                                                             user_offsets_[user + 1] - user_offsets_[user]);
}

bool InteractionSet::contains(std::size_t user, std::size_t item) const {
    auto items = items_of(user);
    return std::binary_search(items.begin(), items.end(), item);
}

LoadedInteractions load_interactions(std::istream& in) {
    std::unordered_map<std::string, std::size_t> user_index;
    std::unordered_map<std::string, std::size_t> item_index;
    IdMap ids;
    std::vector<Interaction> pairs;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::istringstream fields(line);
        std::string user;
        std::string item;
        std::string extra;
        if (!(fields >> user >> item)) throw ParseError(line_no, "expected 'user item', got '" + line + "'");
        if (fields >> extra) throw ParseError(line_no, "unexpected trailing token '" + extra + "'");

        const std::size_t u = intern(user_index, ids.users, user);
        const std::size_t i = intern(item_index, ids.items, item);
        pairs.push_back({u, i});
    }
    if (pairs.empty()) throw Error("interaction input contains no pairs");

    InteractionSet set(ids.users.size(), ids.items.size(), std::move(pairs));
    return {std::move(set), std::move(ids)};
}

LoadedInteractions load_interactions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open interaction file '" + path.string() + "'");
    try {
        return load_interactions(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path.string() + ": " + e.what());
    }
}

void write_interactions(std::ostream& out, const InteractionSet& set, const IdMap& ids) {
    for (const auto& p : set.pairs()) out << ids.users.at(p.user) << '\t' << ids.items.at(p.item) << '\n';
}

Split split_train_test(const InteractionSet& set, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ContractError("test_fraction must lie in (0, 1)");
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> per_user(set.n_users());
    for (std::size_t k = 0; k < set.size(); ++k) per_user[set.pairs()[k].user].push_back(k);

    std::vector<bool> in_test(set.size(), false);
    for (auto& idx : per_user) {
        const std::size_t deg = idx.size();
        if (deg < 2) continue;
        // Guard against 0.2 * 10 landing a hair above 2.
        auto n_test = static_cast<std::size_t>(std::ceil(test_fraction * static_cast<double>(deg) - 1e-9));
        n_test = std::clamp<std::size_t>(n_test, 1, deg - 1);
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t t = 0; t < n_test; ++t) in_test[idx[t]] = true;
    }

    std::vector<Interaction> train;
    std::vector<Interaction> test;
    for (std::size_t k = 0; k < set.size(); ++k) (in_test[k] ? test : train).push_back(set.pairs()[k]);
    return {InteractionSet(set.n_users(), set.n_items(), std::move(train)),
            InteractionSet(set.n_users(), set.n_items(), std::move(test)), seed};
}

BipartiteGraph::BipartiteGraph(std::size_t n_users, std::size_t n_items, std::vector<std::size_t> offsets,
                               std::vector<std::size_t> neighbors)
    : n_users_(n_users), n_items_(n_items), offsets_(std::move(offsets)), neighbors_(std::move(neighbors)) {
    if (offsets_.size() != n_users_ + n_items_ + 1 || offsets_.back() != neighbors_.size()) {
        throw ContractError("BipartiteGraph: inconsistent CSR arrays");
    }
}

std::span<const std::size_t> BipartiteGraph::neighbors(std::size_t node) const {
    return std::span<const std::size_t>(neighbors_).subspan(offsets_[node], offsets_[node + 1] - offsets_[node]);
}

BipartiteGraph build_graph(const InteractionSet& train) {
    const std::size_t n = train.n_users();
    const std::size_t nodes = n + train.n_items();
    std::vector<std::size_t> offsets(nodes + 1, 0);
    for (std::size_t v = 0; v < nodes; ++v) offsets[v + 1] = 1;
    for (const auto& p : train.pairs()) {
        ++offsets[p.user + 1];
        ++offsets[n + p.item + 1];
    }
    for (std::size_t v = 0; v < nodes; ++v) offsets[v + 1] += offsets[v];

    std::vector<std::size_t> neighbors(offsets.back());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t v = 0; v < nodes; ++v) neighbors[cursor[v]++] = v;
    for (const auto& p : train.pairs()) {
        neighbors[cursor[p.user]++] = n + p.item;
        neighbors[cursor[n + p.item]++] = p.user;
    }
    for (std::size_t v = 0; v < nodes; ++v) {
        std::sort(neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
                  neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
    }
    return BipartiteGraph(n, train.n_items(), std::move(offsets), std::move(neighbors));
}

std::size_t sample_negative(std::size_t user, const InteractionSet& train, Rng& rng) {
    const auto seen = train.items_of(user);
    const std::size_t m = train.n_items();
    if (seen.size() >= m) {
        throw ContractError("user " + std::to_string(user) + " has interacted with every item; no negative exists");
    }
    // Draw the r-th unseen item, walking the sorted seen list.
    std::uniform_int_distribution<std::size_t> pick(0, m - seen.size() - 1);
    std::size_t r = pick(rng);
    for (std::size_t item : seen) {
        if (item > r) break;
        ++r;
    }
    return r;
}

}  // namespace lgcf
