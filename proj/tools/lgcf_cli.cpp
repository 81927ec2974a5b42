// lgcf: train, evaluate, sweep and ablate Lorentz graph collaborative filtering models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lgcf/errors.hpp"
#include "lgcf/run.hpp"
#include "lgcf/synthetic.hpp"

namespace {

// Flags shared by every run verb; stored as text and applied through
// RunConfig::set so that config files and flags share one parser.
struct RunFlags {
    std::string config_file;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "key=value config file (flags override it)");
        const std::pair<const char*, const char*> flags[] = {
            {"data", "interaction file (user item per line)"},
            {"out", "output directory"},
            {"dim", "embedding dimensionality d"},
            {"layers", "number of graph convolution layers"},
            {"lr", "learning rate"},
            {"weight-decay", "weight decay (hyperbolic distance to origin)"},
            {"margin", "margin of the ranking loss"},
            {"epochs", "training epochs"},
            {"batch-size", "positives per mini-batch"},
            {"seed", "random seed (split, init, sampling)"},
            {"mode", "hyperbolic|tangent"},
            {"activation", "none|relu"},
            {"k", "comma separated cutoffs, e.g. 10,20"},
            {"test-fraction", "per-user held-out fraction"},
            {"init-sigma", "wrapped normal init scale"},
            {"per-layer-hinge", "apply the hinge per layer (true|false)"},
        };
        for (const auto& [name, help] : flags) {
            app->add_option("--" + std::string(name), values[name], help);
        }
    }

    lgcf::RunConfig resolve(const CLI::App* app) const {
        lgcf::RunConfig config;
        if (!config_file.empty()) config = lgcf::load_run_config(config_file, config);
        for (const auto& [name, value] : values) {
            if (app->get_option("--" + name)->count() > 0) config.set(name, value);
        }
        return config;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lorentz graph convolution for collaborative filtering"};
    app.require_subcommand(1);

    RunFlags train_flags;
    auto* train = app.add_subcommand("train", "train a model and write checkpoint, loss history and manifest");
    train_flags.attach(train);

    RunFlags eval_flags;
    std::string checkpoint;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (Recall@K, NDCG@K)");
    eval_flags.attach(eval);
    eval->add_option("--checkpoint", checkpoint, "checkpoint file (default: <out>/checkpoint.bin)");

    RunFlags sweep_flags;
    std::string dims_text = "20,30,40,50";
    auto* sweep = app.add_subcommand("sweep", "train and evaluate once per dimensionality");
    sweep_flags.attach(sweep);
    sweep->add_option("--dims", dims_text, "comma separated dimensionalities");

    RunFlags ablate_flags;
    auto* ablate = app.add_subcommand("ablate", "compare hyperbolic and tangent aggregation");
    ablate_flags.attach(ablate);

    std::string generate_out;
    std::uint64_t generate_seed = 0;
    lgcf::TreeBenchmarkConfig tree;
    auto* generate = app.add_subcommand("generate", "write a synthetic tree-structured interaction file");
    generate->add_option("--out", generate_out, "output file")->required();
    generate->add_option("--seed", generate_seed, "generator seed");
    generate->add_option("--users", tree.users, "number of users");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            lgcf::cmd_train(train_flags.resolve(train), std::cout);
        } else if (eval->parsed()) {
            const auto config = eval_flags.resolve(eval);
            const auto path = checkpoint.empty() ? config.out / "checkpoint.bin" : std::filesystem::path(checkpoint);
            const auto report = lgcf::cmd_eval(config, path, std::cerr);
            lgcf::write_report(std::cout, report);
        } else if (sweep->parsed()) {
            std::vector<std::size_t> dims = lgcf::parse_cutoffs(dims_text);
            lgcf::cmd_sweep(sweep_flags.resolve(sweep), dims, std::cout);
        } else if (ablate->parsed()) {
            lgcf::cmd_ablate(ablate_flags.resolve(ablate), std::cout);
        } else if (generate->parsed()) {
            const auto data = lgcf::make_tree_benchmark(tree, generate_seed);
            std::ofstream out(generate_out);
            if (!out) throw lgcf::Error("cannot write '" + generate_out + "'");
            lgcf::write_interactions(out, data.set, data.ids);
            std::cout << "wrote " << data.set.size() << " interactions to " << generate_out << '\n';
        }
    } catch (const lgcf::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
