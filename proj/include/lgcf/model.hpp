#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lgcf/dataset.hpp"
#include "lgcf/geometry.hpp"

namespace lgcf {

enum class Activation { None, Relu };
enum class Mode { Hyperbolic, Tangent };

std::string_view to_string(Activation a);
std::string_view to_string(Mode m);
Activation parse_activation(std::string_view s);
Mode parse_mode(std::string_view s);

struct ModelConfig {
    std::size_t dim = 50;
    std::size_t layers = 3;
    Activation activation = Activation::Relu;
    Mode mode = Mode::Hyperbolic;
    double margin = 0.5;
    double init_sigma = 0.1;
    /// Apply the hinge per layer instead of once to the summed distances.
    bool per_layer_hinge = false;

    /// Throws ContractError when d < 2, L < 1, margin < 0 or sigma <= 0.
    void validate() const;
};

/// Row-major table of hyperboloid points; users first, then items.
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t rows, std::size_t dim);
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    /// Intrinsic dimension d; each row holds d+1 doubles.
    std::size_t dim() const noexcept { return width_ - 1; }
    std::size_t width() const noexcept { return width_; }

    std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * width_, width_); }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_).subspan(r * width_, width_);
    }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    /// Largest |<x,x>_L + 1| over all rows.
    double max_constraint_violation() const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t width_ = 1;
    std::vector<double> data_;
};

/// Layer outputs e^(1) .. e^(L); layer 0 (the parameters) is not included.
struct LayerStack {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<EmbeddingMatrix> layers;

    std::size_t item_node(std::size_t item) const noexcept { return n_users + item; }
};

EmbeddingMatrix init_embeddings(std::size_t count, const ModelConfig& config, Rng& rng);

/// One Klein-bridge convolution: Einstein midpoint over N(i), mapped back to
/// the hyperboloid, then optional ReLU + calibration.
EmbeddingMatrix conv_layer(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings, Activation activation);

/// Variant aggregating by the plain mean of log_o(e_j) and mapping back with exp_o.
EmbeddingMatrix tangent_layer(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings,
                              Activation activation);

LayerStack forward(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config);
LayerStack tangent_forward(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config);
/// Dispatches on config.mode.
LayerStack propagate(const BipartiteGraph& graph, const EmbeddingMatrix& initial, const ModelConfig& config);

inline constexpr double kScoreCap = 1e12;

/// sum_l d_L^2(e_u^(l), e_i^(l)).
double summed_squared_distance(std::size_t user, std::size_t item, const LayerStack& stack);

/// 1 / summed_squared_distance, capped at kScoreCap for coincident embeddings.
double score(std::size_t user, std::size_t item, const LayerStack& stack);

double pair_loss(std::size_t user, std::size_t positive, std::size_t negative, const LayerStack& stack,
                 double margin, bool per_layer_hinge = false);

}  // namespace lgcf
