#include "lgcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "lgcf/errors.hpp"
#include "lgcf/geometry.hpp"

namespace lgcf {

namespace {

bool is_relevant(std::span<const std::size_t> sorted_test, std::size_t item) {
    return std::binary_search(sorted_test.begin(), sorted_test.end(), item);
}

std::vector<std::size_t> sorted_copy(std::span<const std::size_t> v) {
    std::vector<std::size_t> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::vector<std::size_t> rank_items(std::size_t user, const LayerStack& stack,
                                    std::span<const std::size_t> train_items) {
    const auto excluded = sorted_copy(train_items);
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(stack.n_items);
    for (std::size_t item = 0; item < stack.n_items; ++item) {
        if (is_relevant(excluded, item)) continue;
        candidates.emplace_back(summed_squared_distance(user, item, stack), item);
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<std::size_t> ranked;
    ranked.reserve(candidates.size());
    for (const auto& c : candidates) ranked.push_back(c.second);
    return ranked;
}

double recall_at_k(std::span<const std::size_t> ranked, std::span<const std::size_t> test_items, std::size_t k) {
    const auto test = sorted_copy(test_items);
    if (test.empty()) throw ContractError("recall_at_k: empty test set");
    const std::size_t top = std::min(k, ranked.size());
    std::size_t hits = 0;
    for (std::size_t p = 0; p < top; ++p) hits += is_relevant(test, ranked[p]) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

double ndcg_at_k(std::span<const std::size_t> ranked, std::span<const std::size_t> test_items, std::size_t k) {
    const auto test = sorted_copy(test_items);
    if (test.empty()) throw ContractError("ndcg_at_k: empty test set");
    const std::size_t top = std::min(k, ranked.size());
    double dcg = 0.0;
    for (std::size_t p = 0; p < top; ++p) {
        if (is_relevant(test, ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
    double idcg = 0.0;
    for (std::size_t p = 0; p < std::min(k, test.size()); ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

EvalReport evaluate(const LayerStack& stack, const Split& split, std::span<const std::size_t> cutoffs,
                    bool keep_user_rows) {
    if (cutoffs.empty()) throw ContractError("evaluate: no cutoffs given");
    if (split.test.n_users() != stack.n_users || split.test.n_items() != stack.n_items) {
        throw DimensionError("evaluate: split and layer stack disagree on sizes");
    }

    EvalReport report;
    report.cutoffs.assign(cutoffs.begin(), cutoffs.end());
    report.recall.assign(cutoffs.size(), 0.0);
    report.ndcg.assign(cutoffs.size(), 0.0);

    for (std::size_t u = 0; u < stack.n_users; ++u) {
        const auto test = split.test.items_of(u);
        if (test.empty()) continue;
        const auto ranked = rank_items(u, stack, split.train.items_of(u));
        UserMetrics row{u, {}, {}};
        for (std::size_t c = 0; c < cutoffs.size(); ++c) {
            row.recall.push_back(recall_at_k(ranked, test, cutoffs[c]));
            row.ndcg.push_back(ndcg_at_k(ranked, test, cutoffs[c]));
            report.recall[c] += row.recall.back();
            report.ndcg[c] += row.ndcg.back();
        }
        ++report.evaluable_users;
        if (keep_user_rows) report.users.push_back(std::move(row));
    }
    if (report.evaluable_users == 0) throw ContractError("evaluate: no user has a nonempty test set");
    const double inv = 1.0 / static_cast<double>(report.evaluable_users);
    for (auto& r : report.recall) r *= inv;
    for (auto& n : report.ndcg) n *= inv;
    return report;
}

void write_report(std::ostream& out, const EvalReport& report) {
    for (std::size_t c = 0; c < report.cutoffs.size(); ++c) {
        out << "recall@" << report.cutoffs[c] << '=' << format_metric(report.recall[c]) << '\n';
    }
    for (std::size_t c = 0; c < report.cutoffs.size(); ++c) {
        out << "ndcg@" << report.cutoffs[c] << '=' << format_metric(report.ndcg[c]) << '\n';
    }
}

void print_report_table(std::ostream& out, const EvalReport& report) {
    char line[96];
    std::snprintf(line, sizeof line, "%6s  %10s  %10s\n", "K", "Recall@K", "NDCG@K");
    out << line;
    for (std::size_t c = 0; c < report.cutoffs.size(); ++c) {
        std::snprintf(line, sizeof line, "%6zu  %10.4f  %10.4f\n", report.cutoffs[c], report.recall[c],
                      report.ndcg[c]);
        out << line;
    }
    out << "evaluated users: " << report.evaluable_users << '\n';
}

}  // namespace lgcf
