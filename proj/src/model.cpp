#include "lgcf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lgcf/errors.hpp"

namespace lgcf {

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "none"; }
std::string_view to_string(Mode m) { return m == Mode::Tangent ? "tangent" : "hyperbolic"; }

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::Relu;
    if (s == "none") return Activation::None;
    throw ContractError("unknown activation '" + std::string(s) + "' (expected none|relu)");
}

Mode parse_mode(std::string_view s) {
    if (s == "hyperbolic") return Mode::Hyperbolic;
    if (s == "tangent") return Mode::Tangent;
    throw ContractError("unknown mode '" + std::string(s) + "' (expected hyperbolic|tangent)");
}

void ModelConfig::validate() const {
    if (dim < 2) throw ContractError("embedding dimension must be >= 2");
    if (layers < 1) throw ContractError("layer count must be >= 1");
    if (!(margin >= 0.0)) throw ContractError("margin must be non-negative");
    if (!(init_sigma > 0.0)) throw ContractError("init_sigma must be positive");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : rows_(rows), width_(dim + 1), data_(rows * (dim + 1), 0.0) {
    for (std::size_t r = 0; r < rows_; ++r) data_[r * width_] = 1.0;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), width_(dim + 1), data_(std::move(data)) {
    if (data_.size() != rows_ * width_) throw DimensionError("EmbeddingMatrix: payload size mismatch");
}

double EmbeddingMatrix::max_constraint_violation() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        auto x = row(r);
        const double v = std::abs(geometry::lorentz_inner(x, x) + 1.0);
        if (std::isnan(v)) return v;
        worst = std::max(worst, v);
    }
    return worst;
}

EmbeddingMatrix init_embeddings(std::size_t count, const ModelConfig& config, Rng& rng) {
    config.validate();
    EmbeddingMatrix e(count, config.dim);
    for (std::size_t r = 0; r < count; ++r) geometry::sample_wrapped_normal(config.init_sigma, rng, e.row(r));
    return e;
}

EmbeddingMatrix conv_layer(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings, Activation activation) {
    const std::size_t nodes = graph.node_count();
    const std::size_t d = embeddings.dim();
    if (embeddings.rows() != nodes) throw DimensionError("conv_layer: embedding rows do not match graph nodes");

    // Klein coordinates (clamped) and Lorentz factors of every node.
    std::vector<double> klein(nodes * d);
    std::vector<double> gamma(nodes);
    for (std::size_t v = 0; v < nodes; ++v) {
        std::span<double> k(klein.data() + v * d, d);
        geometry::to_klein(embeddings.row(v), k);
        geometry::clamp_to_ball(k);
        gamma[v] = geometry::lorentz_factor(std::span<const double>(k));
    }

    EmbeddingMatrix out(nodes, d);
    std::vector<double> mid(d);
    for (std::size_t v = 0; v < nodes; ++v) {
        std::fill(mid.begin(), mid.end(), 0.0);
        double den = 0.0;
        for (std::size_t j : graph.neighbors(v)) {
            const double* k = klein.data() + j * d;
            for (std::size_t c = 0; c < d; ++c) mid[c] += gamma[j] * k[c];
            den += gamma[j];
        }
        for (double& c : mid) c /= den;

        auto z = out.row(v);
        geometry::from_klein(mid, z);
        if (activation == Activation::Relu) {
            for (double& c : z) c = std::max(c, 0.0);
            geometry::renormalize_in_place(z);
        }
    }
    return out;
}

EmbeddingMatrix tangent_layer(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings,
                              Activation activation) {
    const std::size_t nodes = graph.node_count();
    const std::size_t w = embeddings.width();
    if (embeddings.rows() != nodes) throw DimensionError("tangent_layer: embedding rows do not match graph nodes");

    const auto origin = geometry::LorentzPoint::origin(embeddings.dim());
    std::vector<double> lifted(nodes * w);
    for (std::size_t v = 0; v < nodes; ++v) {
        geometry::log_map(origin.coords(), embeddings.row(v), std::span<double>(lifted.data() + v * w, w));
    }

    EmbeddingMatrix out(nodes, embeddings.dim());
    std::vector<double> mean(w);
    for (std::size_t v = 0; v < nodes; ++v) {
        std::fill(mean.begin(), mean.end(), 0.0);
        const auto nbrs = graph.neighbors(v);
        for (std::size_t j : nbrs) {
            const double* t = lifted.data() + j * w;
            for (std::size_t c = 0; c < w; ++c) mean[c] += t[c];
        }
        const double inv = 1.0 / static_cast<double>(nbrs.size());
        for (double& c : mean) c *= inv;
        if (activation == Activation::Relu) {
            for (double& c : mean) c = std::max(c, 0.0);
        }
        geometry::exp_map(origin.coords(), mean, out.row(v));
    }
    return out;
}

namespace {

template <typename Layer>
LayerStack run_layers(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config,
                      Layer layer) {
    config.validate();
    if (initial.dim() != config.dim) throw DimensionError("embedding dimension does not match config");
    LayerStack stack{graph.n_users(), graph.n_items(), {}};
    stack.layers.reserve(config.layers);
    const EmbeddingMatrix* prev = &initial;
    for (std::size_t l = 0; l < config.layers; ++l) {
        stack.layers.push_back(layer(graph, *prev, config.activation));
        prev = &stack.layers.back();
    }
    return stack;
}

}  // namespace

LayerStack forward(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config) {
    return run_layers(graph, initial, config, conv_layer);
}

LayerStack tangent_forward(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config) {
    return run_layers(graph, initial, config, tangent_layer);
}

LayerStack propagate(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config) {
    return config.mode == Mode::Tangent ? tangent_forward(graph, initial, config) : forward(graph, initial, config);
}

double summed_squared_distance(std::size_t user, std::size_t item, const LayerStack& stack) {
    if (stack.layers.empty()) throw ContractError("empty layer stack");
    const std::size_t node = stack.item_node(item);
    double total = 0.0;
    for (const auto& layer : stack.layers) total += geometry::squared_distance(layer.row(user), layer.row(node));
    return total;
}

double score(std::size_t user, std::size_t item, const LayerStack& stack) {
    const double total = summed_squared_distance(user, item, stack);
    if (total < 1.0 / kScoreCap) return kScoreCap;
    return 1.0 / total;
}

double pair_loss(std::size_t user, std::size_t positive, std::size_t negative, const LayerStack& stack,
                 double margin, bool per_layer_hinge) {
    if (!(margin >= 0.0)) throw ContractError("margin must be non-negative");
    if (!per_layer_hinge) {
        const double gap = margin + summed_squared_distance(user, positive, stack) -
                           summed_squared_distance(user, negative, stack);
        return std::max(gap, 0.0);
    }
    const std::size_t pos = stack.item_node(positive);
    const std::size_t neg = stack.item_node(negative);
    double total = 0.0;
    for (const auto& layer : stack.layers) {
        const double gap = margin + geometry::squared_distance(layer.row(user), layer.row(pos)) -
                           geometry::squared_distance(layer.row(user), layer.row(neg));
        total += std::max(gap, 0.0);
    }
    return total;
}

}  // namespace lgcf
