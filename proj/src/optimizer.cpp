#include "lgcf/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "lgcf/errors.hpp"

namespace lgcf {

namespace {

// Sorted distinct graph nodes referenced by a batch (users and both items).
std::vector<std::size_t> batch_nodes(const BipartiteGraph& graph, std::span<const Triple> batch) {
    std::vector<std::size_t> nodes;
    nodes.reserve(batch.size() * 3);
    for (const auto& t : batch) {
        if (t.user >= graph.n_users() || t.positive >= graph.n_items() || t.negative >= graph.n_items()) {
            throw ContractError("batch entry out of range");
        }
        nodes.push_back(t.user);
        nodes.push_back(graph.item_node(t.positive));
        nodes.push_back(graph.item_node(t.negative));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

// needed[l] lists the nodes whose layer-l embedding is required; needed[L] is
// the batch itself and needed[l-1] = union of N(v) over needed[l].
std::vector<std::vector<std::size_t>> needed_nodes(const BipartiteGraph& graph, std::vector<std::size_t> top,
                                                   std::size_t layers) {
    std::vector<std::vector<std::size_t>> needed(layers + 1);
    needed[layers] = std::move(top);
    std::vector<char> mark(graph.node_count());
    for (std::size_t l = layers; l > 0; --l) {
        std::fill(mark.begin(), mark.end(), 0);
        for (std::size_t v : needed[l]) {
            for (std::size_t j : graph.neighbors(v)) mark[j] = 1;
        }
        for (std::size_t v = 0; v < mark.size(); ++v) {
            if (mark[v]) needed[l - 1].push_back(v);
        }
    }
    return needed;
}

constexpr std::uint32_t kUnset = 0xFFFFFFFFu;

}  // namespace

void OptimConfig::validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ContractError("learning rate must be finite and >= 0");
    if (!(weight_decay >= 0.0)) throw ContractError("weight decay must be >= 0");
    if (batch_size == 0) throw ContractError("batch size must be positive");
}

LossAndGrad batch_loss_and_grad(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings,
                                std::span<const Triple> batch, const ModelConfig& config, double weight_decay) {
    config.validate();
    if (batch.empty()) throw ContractError("batch_loss_and_grad: empty batch");
    if (embeddings.rows() != graph.node_count()) throw DimensionError("embedding rows do not match graph nodes");

    const std::size_t layers = config.layers;
    auto top = batch_nodes(graph, batch);
    const auto needed = needed_nodes(graph, top, layers);

    Tape tape;
    // var[l][node] -> tape entry of e^(l)_node.
    std::vector<std::vector<std::uint32_t>> var(layers + 1, std::vector<std::uint32_t>(graph.node_count(), kUnset));
    for (std::size_t v : needed[0]) var[0][v] = tape.leaf(v, embeddings.row(v)).index;

    std::vector<std::uint32_t> lifted(graph.node_count(), kUnset);
    std::vector<Tape::Var> gather;
    for (std::size_t l = 1; l <= layers; ++l) {
        // Klein coordinates (or tangent lifts) of the previous layer.
        for (std::size_t j : needed[l - 1]) {
            const Tape::Var prev{var[l - 1][j]};
            lifted[j] = (config.mode == Mode::Tangent ? tape.log_origin(prev) : tape.to_klein(prev)).index;
        }
        for (std::size_t v : needed[l]) {
            gather.clear();
            for (std::size_t j : graph.neighbors(v)) gather.push_back({lifted[j]});
            Tape::Var out;
            if (config.mode == Mode::Tangent) {
                out = tape.mean(gather);
                if (config.activation == Activation::Relu) out = tape.relu(out);
                out = tape.exp_origin(out);
            } else {
                out = tape.from_klein(tape.klein_midpoint(gather));
                if (config.activation == Activation::Relu) out = tape.calibrate(tape.relu(out));
            }
            var[l][v] = out.index;
        }
    }

    std::vector<Tape::Var> terms;
    std::vector<double> weights;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    std::vector<Tape::Var> dists;
    std::vector<double> signs;
    for (const auto& t : batch) {
        const std::size_t u = t.user;
        const std::size_t p = graph.item_node(t.positive);
        const std::size_t n = graph.item_node(t.negative);
        Tape::Var loss;
        if (config.per_layer_hinge) {
            dists.clear();
            for (std::size_t l = 1; l <= layers; ++l) {
                const Tape::Var pos_neg[] = {tape.squared_distance({var[l][u]}, {var[l][p]}),
                                             tape.squared_distance({var[l][u]}, {var[l][n]})};
                const double pm[] = {1.0, -1.0};
                dists.push_back(tape.hinge(tape.linear(pos_neg, pm, config.margin)));
            }
            signs.assign(dists.size(), 1.0);
            loss = tape.linear(dists, signs);
        } else {
            dists.clear();
            signs.clear();
            for (std::size_t l = 1; l <= layers; ++l) {
                dists.push_back(tape.squared_distance({var[l][u]}, {var[l][p]}));
                signs.push_back(1.0);
                dists.push_back(tape.squared_distance({var[l][u]}, {var[l][n]}));
                signs.push_back(-1.0);
            }
            loss = tape.hinge(tape.linear(dists, signs, config.margin));
        }
        terms.push_back(loss);
        weights.push_back(inv_batch);
    }

    if (weight_decay > 0.0) {
        const auto origin = geometry::LorentzPoint::origin(embeddings.dim());
        const Tape::Var o = tape.constant(origin.coords());
        for (std::size_t v : top) {
            terms.push_back(tape.squared_distance({var[0][v]}, o));
            weights.push_back(weight_decay);
        }
    }

    const Tape::Var total = tape.linear(terms, weights);
    tape.backward(total);
    return {tape.scalar(total), tape.leaf_gradients()};
}

double batch_loss(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings, std::span<const Triple> batch,
                  const ModelConfig& config, double weight_decay) {
    if (batch.empty()) throw ContractError("batch_loss: empty batch");
    const LayerStack stack = propagate(graph, embeddings, config);
    double loss = 0.0;
    for (const auto& t : batch) {
        loss += pair_loss(t.user, t.positive, t.negative, stack, config.margin, config.per_layer_hinge);
    }
    loss /= static_cast<double>(batch.size());
    if (weight_decay > 0.0) {
        const auto origin = geometry::LorentzPoint::origin(embeddings.dim());
        for (std::size_t v : batch_nodes(graph, batch)) {
            loss += weight_decay * geometry::squared_distance(embeddings.row(v), origin.coords());
        }
    }
    return loss;
}

std::vector<double> riemannian_gradient(std::span<const double> x, std::span<const double> ambient) {
    std::vector<double> h(ambient.begin(), ambient.end());
    h[0] = -h[0];
    geometry::proj_tangent(x, h, h);
    return h;
}

void rsgd_step(EmbeddingMatrix& embeddings, const SparseGrad& grads, double lr) {
    std::vector<double> step(embeddings.width());
    std::vector<double> next(embeddings.width());
    for (const auto& [row, g] : grads.rows) {
        if (row >= embeddings.rows() || g.size() != embeddings.width()) {
            throw DimensionError("rsgd_step: gradient does not match embedding table");
        }
        auto x = embeddings.row(row);
        const auto h = riemannian_gradient(x, g);
        for (std::size_t i = 0; i < step.size(); ++i) step[i] = -lr * h[i];
        const double r = std::sqrt(std::max(0.0, geometry::lorentz_inner(step, step)));
        if (r < geometry::kMinTangentNorm) continue;
        geometry::exp_map(x, step, next);
        geometry::renormalize_in_place(next);
        std::copy(next.begin(), next.end(), x.begin());
    }
}

TrainResult train(const BipartiteGraph& graph, const InteractionSet& train_set, EmbeddingMatrix initial,
                  const ModelConfig& model_config, const OptimConfig& optim_config, const EpochCallback& on_epoch) {
    model_config.validate();
    optim_config.validate();
    if (initial.rows() != graph.node_count() || train_set.n_users() != graph.n_users() ||
        train_set.n_items() != graph.n_items()) {
        throw DimensionError("train: graph, interactions and embeddings disagree on sizes");
    }

    TrainResult result{std::move(initial), {}};
    result.epoch_losses.reserve(optim_config.epochs);
    Rng rng(optim_config.seed);

    // Users that have interacted with every item cannot produce negatives.
    std::vector<Interaction> positives;
    for (const auto& p : train_set.pairs()) {
        if (train_set.items_of(p.user).size() < train_set.n_items()) positives.push_back(p);
    }
    if (positives.empty()) throw ContractError("train: no trainable positive pairs");

    std::vector<Triple> batch;
    for (std::size_t epoch = 1; epoch <= optim_config.epochs; ++epoch) {
        std::shuffle(positives.begin(), positives.end(), rng);
        double weighted = 0.0;
        for (std::size_t start = 0; start < positives.size(); start += optim_config.batch_size) {
            const std::size_t stop = std::min(positives.size(), start + optim_config.batch_size);
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const auto& p = positives[k];
                batch.push_back({p.user, p.item, sample_negative(p.user, train_set, rng)});
            }
            auto [loss, grads] =
                batch_loss_and_grad(graph, result.embeddings, batch, model_config, optim_config.weight_decay);
            if (!std::isfinite(loss)) throw DivergenceError(epoch, loss);
            weighted += loss * static_cast<double>(batch.size());
            rsgd_step(result.embeddings, grads, optim_config.lr);
        }
        const double mean_loss = weighted / static_cast<double>(positives.size());
        result.epoch_losses.push_back(mean_loss);
        if (on_epoch) on_epoch({epoch, mean_loss});
    }
    return result;
}

}  // namespace lgcf
