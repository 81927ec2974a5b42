// Acceptance suite: one PASS/FAIL line per criterion. Thresholds and run
// settings are pinned below; the process exits nonzero if any line fails.
//
// Usage: lgcf_acceptance [criterion-name ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "lgcf/checkpoint.hpp"
#include "lgcf/eval.hpp"
#include "lgcf/geometry.hpp"
#include "lgcf/optimizer.hpp"
#include "lgcf/run.hpp"
#include "lgcf/synthetic.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
namespace geo = lgcf::geometry;
using namespace lgcf;
using test_support::random_point;

namespace {

// Tolerances.
constexpr double kConstraintTol = 1e-9;
constexpr double kKleinRoundTripTol = 1e-10;
constexpr double kExpLogTol = 1e-8;
constexpr double kGradRelTol = 1e-5;
constexpr double kGradAbsTol = 1e-8;
constexpr std::size_t kGradMinCoordinates = 200;
constexpr double kDescentRatio = 0.5;
constexpr double kRankingMultiple = 3.0;
constexpr int kAblationSeeds = 5;
constexpr int kAblationWinsNeeded = 4;

// Runtime budgets in seconds.
constexpr double kGeometryBudget = 10;
constexpr double kGradientBudget = 60;
constexpr double kClosureBudget = 30;
constexpr double kDescentBudget = 60;
constexpr double kRankingBudget = 300;
constexpr double kAblationBudget = 900;
constexpr double kTrendBudget = 1200;

// Shared settings for every run on the synthetic tree benchmark.
constexpr std::uint64_t kBenchmarkSeed = 1;
RunConfig benchmark_config(std::uint64_t seed) {
    RunConfig c;
    c.model.dim = 16;
    c.model.layers = 3;
    c.model.activation = Activation::Relu;
    c.model.margin = 0.5;
    c.optim.lr = 0.1;
    c.optim.weight_decay = 0.005;
    c.optim.epochs = 200;
    c.optim.batch_size = 64;
    c.optim.seed = seed;
    c.cutoffs = {10, 20};
    c.test_fraction = 0.2;
    return c;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double constraint(std::span<const double> x) { return std::abs(geo::lorentz_inner(x, x) + 1.0); }

// ---------------------------------------------------------------------------

// Sampled points lie within this geodesic radius of the origin, so exp_map
// outputs stay within twice it. The absolute constraint tolerance is only
// representable while eps * x0^2 << 1e-9, i.e. radius below about 8.
constexpr double kMaxRadius = 4.0;

Outcome geometry_suite() {
    Rng rng(11);
    std::normal_distribution<double> normal;
    double worst_constraint = 0.0, worst_klein = 0.0, worst_explog = 0.0, worst_symmetry = 0.0;
    std::size_t triangle_violations = 0, identity_violations = 0;

    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 2 + trial % 7;
        const auto x = random_point(d, kMaxRadius, rng);
        const auto y = random_point(d, kMaxRadius, rng);
        const auto z = random_point(d, kMaxRadius, rng);

        // Every point-producing kernel.
        const auto v = test_support::random_tangent(x, kMaxRadius * std::uniform_real_distribution<double>()(rng), rng);
        const auto ex = geo::exp_map(x, v);
        worst_constraint = std::max(worst_constraint, constraint(ex.coords()));
        const auto kx = geo::to_klein(x);
        worst_constraint = std::max(worst_constraint, constraint(geo::from_klein(kx).coords()));
        const std::vector mids{kx, geo::to_klein(y), geo::to_klein(z)};
        worst_constraint = std::max(worst_constraint, constraint(geo::from_klein(geo::klein_midpoint(mids)).coords()));
        std::vector<double> ambient(d + 1);
        for (double& c : ambient) c = normal(rng);
        worst_constraint = std::max(worst_constraint, constraint(geo::calibrate(ambient).coords()));
        for (double& c : ambient) c = std::max(c, 0.0);
        worst_constraint = std::max(worst_constraint, constraint(geo::calibrate(ambient).coords()));

        // Klein round trip, both directions.
        const auto back = geo::from_klein(kx);
        for (std::size_t i = 0; i <= d; ++i) worst_klein = std::max(worst_klein, std::abs(back[i] - x[i]));
        const auto kk = geo::to_klein(geo::from_klein(kx));
        for (std::size_t i = 0; i < d; ++i) worst_klein = std::max(worst_klein, std::abs(kk[i] - kx[i]));

        // Distance axioms.
        const double dxy = geo::lorentz_distance(x, y);
        const double dyz = geo::lorentz_distance(y, z);
        const double dxz = geo::lorentz_distance(x, z);
        worst_symmetry = std::max(worst_symmetry, std::abs(dxy - geo::lorentz_distance(y, x)));
        if (dxz > dxy + dyz + 1e-9) ++triangle_violations;
        if (geo::lorentz_distance(x, x) > 1e-7) ++identity_violations;

        // exp/log inversion on tangent norms up to 5.
        const auto lg = geo::log_map(x, ex);
        for (std::size_t i = 0; i <= d; ++i) worst_explog = std::max(worst_explog, std::abs(lg[i] - v[i]));
    }
    const bool pass = worst_constraint <= kConstraintTol && worst_klein <= kKleinRoundTripTol &&
                      worst_explog <= kExpLogTol && worst_symmetry == 0.0 && triangle_violations == 0 &&
                      identity_violations == 0;
    return {pass, fmt("constraint %.1e, klein %.1e, exp/log %.1e, asym %.1e, triangle/identity violations %zu/%zu",
                      worst_constraint, worst_klein, worst_explog, worst_symmetry, triangle_violations,
                      identity_violations)};
}

Outcome gradient_gate() {
    Rng rng(12);
    std::size_t checked = 0, near_zero = 0, instances = 0, resampled = 0;
    double worst_rel = 0.0, worst_abs = 0.0;
    for (auto mode : {Mode::Hyperbolic, Mode::Tangent}) {
        for (auto act : {Activation::None, Activation::Relu}) {
            for (double lambda : {0.0, 0.005}) {
                for (int rep = 0; rep < 2; ++rep) {
                    // At most 20 nodes, d <= 8, L <= 3.
                    const std::size_t users = 4 + rep * 4, items = 6 + rep * 2;
                    const auto set = test_support::random_interactions(users, items, 0.3, rng);
                    const auto g = build_graph(set);
                    ModelConfig c;
                    c.dim = rep == 0 ? 4 : 8;
                    c.layers = rep == 0 ? 3 : 2;
                    c.activation = act;
                    c.mode = mode;
                    c.margin = 3.0;
                    auto e = test_support::random_embeddings(users + items, c.dim, 1.5, rng);
                    while (!test_support::fd_well_conditioned(g, e, c)) {
                        e = test_support::random_embeddings(users + items, c.dim, 1.5, rng);
                        ++resampled;
                    }
                    const auto batch = test_support::random_batch(set, 4, rng);
                    const auto r = test_support::check_gradient(g, e, batch, c, lambda);
                    checked += r.coordinates - r.near_zero;
                    near_zero += r.near_zero;
                    worst_rel = std::max(worst_rel, r.max_relative_error);
                    worst_abs = std::max(worst_abs, r.max_near_zero_error);
                    ++instances;
                }
            }
        }
    }
    const bool pass = checked >= kGradMinCoordinates && worst_rel <= kGradRelTol && worst_abs <= kGradAbsTol;
    return {pass, fmt("%zu coordinates over %zu instances (%zu resampled), max rel err %.2e (%zu near-zero, max abs "
                      "%.1e)",
                      checked, instances, resampled, worst_rel, near_zero, worst_abs)};
}

Outcome manifold_closure() {
    Rng rng(13);
    double worst = 0.0;
    std::size_t steps = 0;
    for (int instance = 0; instance < 10; ++instance) {
        const auto set = test_support::random_interactions(10, 10, 0.3, rng);
        const auto g = build_graph(set);
        ModelConfig c;
        c.dim = 6;
        c.layers = 2;
        c.margin = 2.0;
        c.mode = instance % 2 ? Mode::Tangent : Mode::Hyperbolic;
        auto e = init_embeddings(20, c, rng);
        for (int s = 0; s < 100; ++s, ++steps) {
            const auto batch = test_support::random_batch(set, 4, rng);
            const auto r = batch_loss_and_grad(g, e, batch, c, 0.005);
            rsgd_step(e, r.grads, 0.5);
            worst = std::max(worst, e.max_constraint_violation());
        }
    }
    return {worst <= kConstraintTol, fmt("%zu steps, max |<x,x>+1| = %.2e", steps, worst)};
}

Outcome descent() {
    Rng rng(14);
    const auto set = test_support::random_interactions(20, 20, 0.2, rng);
    const auto g = build_graph(set);
    ModelConfig c;
    c.dim = 8;
    c.layers = 2;
    auto e = init_embeddings(40, c, rng);
    OptimConfig o;
    o.lr = 0.01;
    o.epochs = 100;
    o.batch_size = 1;
    o.seed = 15;
    const auto r = train(g, set, e, c, o);
    const double ratio = r.epoch_losses.back() / r.epoch_losses.front();
    return {ratio <= kDescentRatio, fmt("epoch 1 loss %.4f, epoch 100 loss %.4f, ratio %.3f", r.epoch_losses.front(),
                                        r.epoch_losses.back(), ratio)};
}

PreparedData tree_benchmark(const RunConfig& config) {
    return prepare_data(make_tree_benchmark({}, kBenchmarkSeed), config);
}

EvalReport train_and_evaluate(const RunConfig& config, const PreparedData& data) {
    const auto outcome = run_training(config, data);
    return run_evaluation(config, data, outcome.embeddings);
}

Outcome ranking_sanity() {
    const auto config = benchmark_config(1);
    const auto data = tree_benchmark(config);
    const auto report = train_and_evaluate(config, data);
    const double baseline = 10.0 / static_cast<double>(data.graph.n_items());
    return {report.recall[0] >= kRankingMultiple * baseline,
            fmt("Recall@10 %.4f vs %.1f x K/m = %.4f", report.recall[0], kRankingMultiple, kRankingMultiple * baseline)};
}

Outcome ablation_ordering() {
    int wins = 0;
    std::string rows;
    for (int seed = 1; seed <= kAblationSeeds; ++seed) {
        auto config = benchmark_config(static_cast<std::uint64_t>(seed));
        const auto data = tree_benchmark(config);
        config.model.mode = Mode::Hyperbolic;
        const auto hyp = train_and_evaluate(config, data);
        config.model.mode = Mode::Tangent;
        const auto tan = train_and_evaluate(config, data);
        const bool win = hyp.recall[0] >= tan.recall[0] && hyp.ndcg[0] >= tan.ndcg[0];
        wins += win;
        rows += fmt(" [seed %d R@10 %.4f/%.4f N@10 %.4f/%.4f]", seed, hyp.recall[0], tan.recall[0], hyp.ndcg[0],
                    tan.ndcg[0]);
    }
    return {wins >= kAblationWinsNeeded,
            fmt("hyperbolic >= tangent in %d/%d seeds (need %d); hyp/tan:", wins, kAblationSeeds,
                kAblationWinsNeeded) +
                rows};
}

Outcome dimensionality_trend() {
    // Mean over the ablation seeds: at d >= 8 the benchmark saturates and
    // single-run differences are within seed noise.
    const std::vector<std::size_t> dims{4, 8, 16, 32};
    std::vector<double> mean(dims.size(), 0.0);
    std::string rows;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        rows += fmt(" d=%zu:", dims[k]);
        for (int seed = 1; seed <= kAblationSeeds; ++seed) {
            auto config = benchmark_config(static_cast<std::uint64_t>(seed));
            config.model.dim = dims[k];
            const auto data = tree_benchmark(config);
            const double r = train_and_evaluate(config, data).recall[1];
            mean[k] += r / kAblationSeeds;
            rows += fmt("%s%.3f", seed == 1 ? "[" : ",", r);
        }
        rows += fmt("] mean %.4f", mean[k]);
    }
    const bool pass = mean[0] <= mean[1] && mean[1] <= mean[2];
    return {pass, "Recall@20 over " + std::to_string(kAblationSeeds) + " seeds" + rows};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "lgcf_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto data_path = root / "tree.txt";
    {
        const auto data = make_tree_benchmark({}, kBenchmarkSeed);
        std::ofstream out(data_path);
        write_interactions(out, data.set, data.ids);
    }
    std::vector<std::string> checkpoints, metrics;
    std::ostringstream log;
    for (const char* run : {"a", "b"}) {
        auto config = benchmark_config(7);
        config.optim.epochs = 20;
        config.data = data_path;
        config.out = root / run;
        const auto artifacts = cmd_train(config, log);
        cmd_eval(config, artifacts.checkpoint, log);
        checkpoints.push_back(slurp(artifacts.checkpoint));
        metrics.push_back(slurp(config.out / "metrics.txt"));
    }
    fs::remove_all(root);
    const bool same_ckpt = !checkpoints[0].empty() && checkpoints[0] == checkpoints[1];
    const bool same_metrics = !metrics[0].empty() && metrics[0] == metrics[1];
    return {same_ckpt && same_metrics, fmt("checkpoints %s (%zu bytes), metric reports %s",
                                           same_ckpt ? "identical" : "differ", checkpoints[0].size(),
                                           same_metrics ? "identical" : "differ")};
}

Outcome metric_oracles() {
    Rng rng(16);
    std::uniform_int_distribution<std::size_t> len(1, 50), kdist(1, 40);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::size_t> pool(80);
        std::iota(pool.begin(), pool.end(), 0);
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::vector<std::size_t> ranked(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(len(rng)));
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::vector<std::size_t> test(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(1 + len(rng) % 12));
        const std::size_t k = kdist(rng);

        const std::set<std::size_t> relevant(test.begin(), test.end());
        std::size_t hits = 0;
        double dcg = 0.0, idcg = 0.0;
        for (std::size_t p = 1; p <= std::min(k, ranked.size()); ++p) {
            if (relevant.count(ranked[p - 1])) {
                ++hits;
                dcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
            }
        }
        for (std::size_t p = 1; p <= std::min(k, test.size()); ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 1.0);
        const double recall = static_cast<double>(hits) / static_cast<double>(test.size());
        const double ndcg = dcg / idcg;
        mismatches += recall_at_k(ranked, test, k) != recall;
        mismatches += ndcg_at_k(ranked, test, k) != ndcg;
    }
    return {mismatches == 0, fmt("1000 random lists, %zu mismatches (exact comparison)", mismatches)};
}

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"geometry-suite", kGeometryBudget, geometry_suite},
        {"gradient-gate", kGradientBudget, gradient_gate},
        {"manifold-closure", kClosureBudget, manifold_closure},
        {"descent", kDescentBudget, descent},
        {"ranking-sanity", kRankingBudget, ranking_sanity},
        {"ablation-ordering", kAblationBudget, ablation_ordering},
        {"dimensionality-trend", kTrendBudget, dimensionality_trend},
        {"determinism", 0, determinism},
        {"metric-oracles", 0, metric_oracles},
    };
    const std::set<std::string> only(argv + 1, argv + argc);

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.name)) continue;
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double elapsed = seconds_since(start);
        std::string timing = fmt("%.1fs", elapsed);
        if (c.budget_seconds > 0) {
            timing += fmt(" of %.0fs", c.budget_seconds);
            if (elapsed > c.budget_seconds) {
                o.pass = false;
                timing += " OVER BUDGET";
            }
        }
        failures += !o.pass;
        std::printf("%s %-22s %s (%s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
