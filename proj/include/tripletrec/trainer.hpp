#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "tripletrec/embedding.hpp"
#include "tripletrec/sampler.hpp"
#include "tripletrec/store.hpp"
#include "tripletrec/weighting.hpp"

namespace tripletrec {

/// 1 - x.y / max(|x||y|, 1e-12), in [0, 2] up to rounding.
double cosine_distance(std::span<const double> x, std::span<const double> y);

struct TrainConfig {
    int dim = 128;
    double lambda1 = 2.5;  // user-user term weight
    double lambda2 = 2.5;  // item-item term weight
    double margin = 0.25;  // shared by all three hinges
    double lr = 0.05;
    int epochs = 10;
    std::size_t batch_size = 256;
    int neighbors = 10;
    int workers = 1;  // > 1: unsynchronized per-sample updates

    bool no_user_loss = false;   // zero out lambda1
    bool no_item_loss = false;   // zero out lambda2
    bool uniform_weights = false;  // force every sample weight to 1

    void validate() const;  // throws Error on out-of-range values
};

/// Sums over a batch. total = term_user_item + term_user_user + term_item_item,
/// each term already scaled by its sample weight and lambda.
struct LossBreakdown {
    double total = 0.0;
    double term_user_item = 0.0;
    double term_user_user = 0.0;
    double term_item_item = 0.0;
    double active_fraction = 0.0;  // samples with at least one nonzero hinge
    std::size_t samples = 0;
};

LossBreakdown loss_on_batch(const EmbeddingTable& table,
                            const std::vector<TripletSample>& batch,
                            const TrainConfig& cfg);

/// Embedding row address: user rows and item rows live in separate planes.
struct RowKey {
    bool is_user = false;
    std::uint32_t ordinal = 0;

    std::uint64_t packed() const {
        return (static_cast<std::uint64_t>(is_user) << 32) | ordinal;
    }
    static RowKey unpack(std::uint64_t key) {
        return {(key >> 32) != 0, static_cast<std::uint32_t>(key & 0xffffffffULL)};
    }
};

/// Analytic gradient of the batch loss with respect to every touched row.
/// Hinges at exactly zero contribute nothing. Exposed so tests can compare
/// it against finite differences of loss_on_batch.
std::unordered_map<std::uint64_t, std::vector<double>> batch_gradient(
    const EmbeddingTable& table, const std::vector<TripletSample>& batch, const TrainConfig& cfg);

/// One SGD step: rows in the batch move by -lr * (batch loss gradient);
/// returns the pre-update loss. workers > 1 switches to per-sample
/// unsynchronized updates (races allowed, expectation unchanged). A
/// non-finite value after the update aborts with a divergence error; a row
/// driven exactly to zero is re-jittered.
LossBreakdown sgd_step(EmbeddingTable& table, const std::vector<TripletSample>& batch,
                       const TrainConfig& cfg);

struct EpochStats {
    int epoch = 0;
    double mean_total = 0.0;
    double mean_user_item = 0.0;
    double mean_user_user = 0.0;
    double mean_item_item = 0.0;
    double active_fraction = 0.0;
    std::size_t samples = 0;
};

/// Epoch loop: rebuild the neighbor index from the current user embeddings,
/// then sample and step through ceil(|interactions| / batch_size) batches.
/// Deterministic for a fixed seed when cfg.workers == 1. epochs == 0
/// returns the init table untouched.
EmbeddingTable train(const InteractionStore& store, EmbeddingTable init,
                     const WeightModel* weights, const TrainConfig& cfg,
                     std::uint64_t seed, std::vector<EpochStats>* trace = nullptr);

}  // namespace tripletrec
