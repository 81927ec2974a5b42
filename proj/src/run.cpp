#include "lgcf/run.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>

#include "lgcf/errors.hpp"

namespace lgcf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ContractError("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
    if (text == "0" || text == "false" || text == "no" || text == "off") return false;
    throw ContractError("invalid boolean '" + std::string(text) + "' for '" + std::string(key) + "'");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", v);
    return buf;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
    std::uint32_t words[2];
    seq.generate(std::begin(words), std::end(words));
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open data file '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t hash_embeddings(const EmbeddingMatrix& e) {
    const auto data = e.data();
    return crc32(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(data.data()),
                                                data.size() * sizeof(double)));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

std::string metrics_text(const EvalReport& report) {
    std::ostringstream s;
    write_report(s, report);
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void RunConfig::validate(bool require_data) const {
    model.validate();
    optim.validate();
    if (cutoffs.empty()) throw ContractError("at least one cutoff K is required");
    for (auto k : cutoffs) {
        if (k == 0) throw ContractError("cutoffs must be positive");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ContractError("test-fraction must lie in (0, 1)");
    if (require_data) {
        if (data.empty()) throw ContractError("no data file given (--data)");
        if (!std::filesystem::exists(data)) throw Error("data file '" + data.string() + "' does not exist");
    }
}

void RunConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "dim") model.dim = parse_number<std::size_t>(key, value);
    else if (key == "layers") model.layers = parse_number<std::size_t>(key, value);
    else if (key == "margin") model.margin = parse_number<double>(key, value);
    else if (key == "init-sigma") model.init_sigma = parse_number<double>(key, value);
    else if (key == "activation") model.activation = parse_activation(value);
    else if (key == "mode") model.mode = parse_mode(value);
    else if (key == "per-layer-hinge") model.per_layer_hinge = parse_bool(key, value);
    else if (key == "lr") optim.lr = parse_number<double>(key, value);
    else if (key == "weight-decay") optim.weight_decay = parse_number<double>(key, value);
    else if (key == "epochs") optim.epochs = parse_number<std::size_t>(key, value);
    else if (key == "batch-size") optim.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "seed") optim.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "k") cutoffs = parse_cutoffs(value);
    else if (key == "data") data = std::string(value);
    else if (key == "out") out = std::string(value);
    else if (key == "test-fraction") test_fraction = parse_number<double>(key, value);
    else throw ContractError("unknown setting '" + std::string(key) + "'");
}

std::string RunConfig::to_text() const {
    std::ostringstream s;
    s << "data=" << data.string() << '\n'
      << "out=" << out.string() << '\n'
      << "dim=" << model.dim << '\n'
      << "layers=" << model.layers << '\n'
      << "activation=" << to_string(model.activation) << '\n'
      << "mode=" << to_string(model.mode) << '\n'
      << "margin=" << format_double(model.margin) << '\n'
      << "init-sigma=" << format_double(model.init_sigma) << '\n'
      << "per-layer-hinge=" << (model.per_layer_hinge ? "true" : "false") << '\n'
      << "lr=" << format_double(optim.lr) << '\n'
      << "weight-decay=" << format_double(optim.weight_decay) << '\n'
      << "epochs=" << optim.epochs << '\n'
      << "batch-size=" << optim.batch_size << '\n'
      << "seed=" << optim.seed << '\n'
      << "test-fraction=" << format_double(test_fraction) << '\n'
      << "k=";
    for (std::size_t c = 0; c < cutoffs.size(); ++c) s << (c ? "," : "") << cutoffs[c];
    s << '\n';
    return s.str();
}

std::vector<std::size_t> parse_cutoffs(std::string_view list) {
    std::vector<std::size_t> ks;
    while (!list.empty()) {
        const auto comma = list.find(',');
        const auto token = trim(list.substr(0, comma));
        if (token.empty()) throw ContractError("empty entry in cutoff list");
        const auto k = parse_number<std::size_t>("k", token);
        if (k == 0) throw ContractError("cutoffs must be positive");
        ks.push_back(k);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    if (ks.empty()) throw ContractError("empty cutoff list");
    return ks;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, path.string() + ": expected key=value");
        try {
            base.set(body.substr(0, eq), body.substr(eq + 1));
        } catch (const ContractError& e) {
            throw ParseError(line_no, path.string() + ": " + e.what());
        }
    }
    return base;
}

// ---------------------------------------------------------------------------

std::uint64_t init_seed(std::uint64_t seed) { return derive_seed(seed, 1); }
std::uint64_t training_seed(std::uint64_t seed) { return derive_seed(seed, 2); }

PreparedData prepare_data(LoadedInteractions interactions, const RunConfig& config, std::uint32_t checksum) {
    Split split = split_train_test(interactions.set, config.test_fraction, config.optim.seed);
    BipartiteGraph graph = build_graph(split.train);
    return {std::move(interactions), std::move(split), std::move(graph), checksum};
}

PreparedData prepare_data(const RunConfig& config) {
    const auto bytes = read_bytes(config.data);
    return prepare_data(load_interactions(config.data), config, crc32(bytes));
}

TrainOutcome run_training(const RunConfig& config, const PreparedData& data, const EpochCallback& on_epoch) {
    Rng init_rng(init_seed(config.optim.seed));
    EmbeddingMatrix initial = init_embeddings(data.graph.node_count(), config.model, init_rng);
    const std::uint32_t init_hash = hash_embeddings(initial);

    OptimConfig optim = config.optim;
    optim.seed = training_seed(config.optim.seed);
    auto result = train(data.graph, data.split.train, initial, config.model, optim, on_epoch);
    return {std::move(initial), std::move(result.embeddings), std::move(result.epoch_losses), init_hash};
}

EvalReport run_evaluation(const RunConfig& config, const PreparedData& data, const EmbeddingMatrix& embeddings) {
    const LayerStack stack = propagate(data.graph, embeddings, config.model);
    return evaluate(stack, data.split, config.cutoffs);
}

CheckpointHeader make_header(const RunConfig& config, const PreparedData& data) {
    return {data.graph.n_users(),
            data.graph.n_items(),
            static_cast<std::uint32_t>(config.model.dim),
            static_cast<std::uint32_t>(config.model.layers),
            config.model.mode,
            config.optim.seed};
}

// ---------------------------------------------------------------------------

TrainArtifacts cmd_train(const RunConfig& config, std::ostream& log) {
    config.validate();
    const PreparedData data = prepare_data(config);
    std::filesystem::create_directories(config.out);

    log << "data: " << data.graph.n_users() << " users, " << data.graph.n_items() << " items, "
        << data.split.train.size() << " train / " << data.split.test.size() << " test pairs\n";
    const std::size_t every = std::max<std::size_t>(1, config.optim.epochs / 10);
    auto outcome = run_training(config, data, [&](const EpochStats& s) {
        if (s.epoch == 1 || s.epoch % every == 0 || s.epoch == config.optim.epochs) {
            log << "epoch " << s.epoch << "  loss " << format_double(s.mean_loss) << '\n';
        }
    });

    TrainArtifacts artifacts{config.out / "checkpoint.bin", config.out / "loss.csv", config.out / "manifest.txt",
                             {}};
    save_checkpoint(artifacts.checkpoint, make_header(config, data), outcome.embeddings);

    std::ostringstream csv;
    csv << "epoch,loss\n";
    for (std::size_t e = 0; e < outcome.epoch_losses.size(); ++e) {
        csv << (e + 1) << ',' << format_double(outcome.epoch_losses[e]) << '\n';
    }
    write_text(artifacts.loss_csv, csv.str());

    std::ostringstream manifest;
    manifest << config.to_text() << "data-crc32=" << hex32(data.checksum) << '\n'
             << "n-users=" << data.graph.n_users() << '\n'
             << "n-items=" << data.graph.n_items() << '\n'
             << "train-pairs=" << data.split.train.size() << '\n'
             << "test-pairs=" << data.split.test.size() << '\n'
             << "init-hash=" << hex32(outcome.init_hash) << '\n';
    write_text(artifacts.manifest, manifest.str());

    artifacts.outcome = std::move(outcome);
    log << "wrote " << artifacts.checkpoint.string() << '\n';
    return artifacts;
}

EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& log) {
    config.validate();
    const Checkpoint ck = load_checkpoint(checkpoint);
    const PreparedData data = prepare_data(config);
    const auto expected = make_header(config, data);
    const auto& h = ck.header;
    if (h.n_users != expected.n_users || h.n_items != expected.n_items) {
        throw CheckpointError("checkpoint has " + std::to_string(h.n_users) + " users x " +
                              std::to_string(h.n_items) + " items but the data has " +
                              std::to_string(expected.n_users) + " x " + std::to_string(expected.n_items));
    }
    if (h.dim != expected.dim || h.layers != expected.layers || h.mode != expected.mode) {
        throw CheckpointError("checkpoint model (dim=" + std::to_string(h.dim) + ", layers=" +
                              std::to_string(h.layers) + ", mode=" + std::string(to_string(h.mode)) +
                              ") does not match the configuration");
    }
    if (h.seed != expected.seed) {
        throw CheckpointError("checkpoint seed " + std::to_string(h.seed) +
                              " differs from the configured seed; the train/test split would not match");
    }

    const EvalReport report = run_evaluation(config, data, ck.embeddings);
    std::filesystem::create_directories(config.out);
    write_text(config.out / "metrics.txt", metrics_text(report));
    print_report_table(log, report);
    return report;
}

std::filesystem::path cmd_sweep(const RunConfig& config, const std::vector<std::size_t>& dims, std::ostream& log) {
    if (dims.empty()) throw ContractError("sweep needs at least one dimensionality");
    config.validate();
    std::ostringstream csv;
    csv << "dim";
    for (auto k : config.cutoffs) csv << ",recall@" << k;
    for (auto k : config.cutoffs) csv << ",ndcg@" << k;
    csv << '\n';

    for (std::size_t d : dims) {
        RunConfig run = config;
        run.model.dim = d;
        run.out = config.out / ("dim_" + std::to_string(d));
        log << "== dim " << d << " ==\n";
        const auto artifacts = cmd_train(run, log);
        const PreparedData data = prepare_data(run);
        const EvalReport report = run_evaluation(run, data, artifacts.outcome.embeddings);
        write_text(run.out / "metrics.txt", metrics_text(report));
        csv << d;
        for (double r : report.recall) csv << ',' << format_double(r);
        for (double n : report.ndcg) csv << ',' << format_double(n);
        csv << '\n';
    }
    std::filesystem::create_directories(config.out);
    const auto path = config.out / "sweep.csv";
    write_text(path, csv.str());
    log << "wrote " << path.string() << '\n';
    return path;
}

std::filesystem::path cmd_ablate(const RunConfig& config, std::ostream& log) {
    config.validate();
    std::ostringstream report_text;
    std::vector<EvalReport> reports;
    for (Mode mode : {Mode::Hyperbolic, Mode::Tangent}) {
        RunConfig run = config;
        run.model.mode = mode;
        run.out = config.out / std::string(to_string(mode));
        log << "== " << to_string(mode) << " ==\n";
        const auto artifacts = cmd_train(run, log);
        const PreparedData data = prepare_data(run);
        reports.push_back(run_evaluation(run, data, artifacts.outcome.embeddings));
        write_text(run.out / "metrics.txt", metrics_text(reports.back()));
        report_text << '[' << to_string(mode) << "]\n"
                    << "seed=" << run.optim.seed << '\n'
                    << "init-hash=" << hex32(artifacts.outcome.init_hash) << '\n'
                    << metrics_text(reports.back());
    }
    const auto path = config.out / "ablation.txt";
    write_text(path, report_text.str());

    char line[96];
    std::snprintf(line, sizeof line, "%-12s %12s %12s\n", "metric", "hyperbolic", "tangent");
    log << line;
    for (std::size_t c = 0; c < config.cutoffs.size(); ++c) {
        const std::string r = "recall@" + std::to_string(config.cutoffs[c]);
        const std::string n = "ndcg@" + std::to_string(config.cutoffs[c]);
        std::snprintf(line, sizeof line, "%-12s %12.4f %12.4f\n", r.c_str(), reports[0].recall[c], reports[1].recall[c]);
        log << line;
        std::snprintf(line, sizeof line, "%-12s %12.4f %12.4f\n", n.c_str(), reports[0].ndcg[c], reports[1].ndcg[c]);
        log << line;
    }
    log << "wrote " << path.string() << '\n';
    return path;
}

}  // namespace lgcf
