#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lgcf/dataset.hpp"
#include "lgcf/model.hpp"
#include "lgcf/tape.hpp"

namespace lgcf {

struct OptimConfig {
    double lr = 0.001;
    double weight_decay = 0.005;
    std::size_t epochs = 1000;
    std::size_t batch_size = 1024;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One training example: user, observed item, sampled unobserved item.
struct Triple {
    std::size_t user = 0;
    std::size_t positive = 0;
    std::size_t negative = 0;
};

struct LossAndGrad {
    double loss = 0.0;
    SparseGrad grads;
};

/// Mean pair loss over the batch plus weight_decay * sum of d_L^2(x, o) over
/// the distinct rows named by the batch, with exact ambient gradients taken
/// through the full L-layer propagation.
LossAndGrad batch_loss_and_grad(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings,
                                std::span<const Triple> batch, const ModelConfig& config, double weight_decay);

/// Same scalar as batch_loss_and_grad, computed by a plain full forward pass.
double batch_loss(const BipartiteGraph& graph, const EmbeddingMatrix& embeddings, std::span<const Triple> batch,
                  const ModelConfig& config, double weight_decay);

/// Riemannian gradient of an ambient gradient at x: proj_x(H g), H = diag(-1, 1, ..., 1).
std::vector<double> riemannian_gradient(std::span<const double> x, std::span<const double> ambient);

/// x <- renormalize(exp_x(-lr * riemannian_gradient)) for every row in grads.
void rsgd_step(EmbeddingMatrix& embeddings, const SparseGrad& grads, double lr);

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

struct TrainResult {
    EmbeddingMatrix embeddings;
    std::vector<double> epoch_losses;
};

/// Shuffled mini-batch RSGD with one fresh uniform negative per positive per
/// epoch. Throws DivergenceError when the loss stops being finite.
TrainResult train(const BipartiteGraph& graph, const InteractionSet& train_set, EmbeddingMatrix initial,
                  const ModelConfig& model_config, const OptimConfig& optim_config,
                  const EpochCallback& on_epoch = {});

}  // namespace lgcf
