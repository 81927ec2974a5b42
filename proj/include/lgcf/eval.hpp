#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "lgcf/dataset.hpp"
#include "lgcf/model.hpp"

namespace lgcf {

/// All items outside `train_items`, nearest first by summed squared layer
/// distance (equivalently highest score); ties go to the lower item index.
std::vector<std::size_t> rank_items(std::size_t user, const LayerStack& stack,
                                    std::span<const std::size_t> train_items);

double recall_at_k(std::span<const std::size_t> ranked, std::span<const std::size_t> test_items, std::size_t k);
double ndcg_at_k(std::span<const std::size_t> ranked, std::span<const std::size_t> test_items, std::size_t k);

struct UserMetrics {
    std::size_t user = 0;
    std::vector<double> recall;  // one entry per cutoff
    std::vector<double> ndcg;
};

struct EvalReport {
    std::vector<std::size_t> cutoffs;
    std::vector<double> recall;  // mean over evaluable users, per cutoff
    std::vector<double> ndcg;
    std::size_t evaluable_users = 0;
    std::vector<UserMetrics> users;  // filled when requested
};

/// Means over users with a nonempty test set. Throws ContractError when there
/// are none or when `cutoffs` is empty.
EvalReport evaluate(const LayerStack& stack, const Split& split, std::span<const std::size_t> cutoffs,
                    bool keep_user_rows = false);

/// One "recall@K=..." and one "ndcg@K=..." line per cutoff.
void write_report(std::ostream& out, const EvalReport& report);
/// Fixed-width table for terminals.
void print_report_table(std::ostream& out, const EvalReport& report);

}  // namespace lgcf
