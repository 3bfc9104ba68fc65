#include "tripletrec/trainer.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tripletrec/error.hpp"
#include "tripletrec/log.hpp"
#include "tripletrec/rng.hpp"

namespace tripletrec {

double cosine_distance(std::span<const double> x, std::span<const double> y) {
    double dot = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        dot += x[k] * y[k];
        sx += x[k] * x[k];
        sy += y[k] * y[k];
    }
    return 1.0 - dot / std::max(std::sqrt(sx) * std::sqrt(sy), 1e-12);
}

void TrainConfig::validate() const {
    if (dim < 2) throw Error("train config: dim must be >= 2");
    if (margin < 0.0) throw Error("train config: margin must be >= 0");
    if (lambda1 < 0.0 || lambda2 < 0.0) throw Error("train config: lambdas must be >= 0");
    if (lr <= 0.0) throw Error("train config: lr must be > 0");
    if (epochs < 0) throw Error("train config: epochs must be >= 0");
    if (batch_size == 0) throw Error("train config: batch_size must be >= 1");
    if (neighbors < 1) throw Error("train config: neighbors must be >= 1");
    if (workers < 1) throw Error("train config: workers must be >= 1");
}

namespace {

inline std::span<double> row_of(EmbeddingTable& table, RowKey key) {
    return key.is_user ? table.user_row(key.ordinal) : table.item_row(key.ordinal);
}
inline std::span<const double> row_of(const EmbeddingTable& table, RowKey key) {
    return key.is_user ? table.user_row(key.ordinal) : table.item_row(key.ordinal);
}

struct SampleHinges {
    double h_ui = 0.0, h_uu = 0.0, h_ii = 0.0;  // unweighted hinge values
};

SampleHinges hinges_for(const EmbeddingTable& t, const TripletSample& s, double margin,
                        bool want_user, bool want_item) {
    SampleHinges h;
    h.h_ui = std::max(cosine_distance(t.user_row(s.anchor_user), t.item_row(s.pos_track)) -
                          cosine_distance(t.user_row(s.anchor_user), t.item_row(s.neg_track)) +
                          margin,
                      0.0);
    if (want_user)
        h.h_uu = std::max(cosine_distance(t.user_row(s.anchor_user), t.user_row(s.pos_user)) -
                              cosine_distance(t.user_row(s.anchor_user), t.user_row(s.neg_user)) +
                              margin,
                          0.0);
    if (want_item)
        h.h_ii = std::max(cosine_distance(t.item_row(s.aux_track), t.item_row(s.pos_track)) -
                              cosine_distance(t.item_row(s.aux_track), t.item_row(s.neg_track)) +
                              margin,
                          0.0);
    return h;
}

using GradMap = std::unordered_map<std::uint64_t, std::vector<double>>;

// Accumulates coeff * (d d(x_a, x_b) / d x_a) onto a's gradient row and the
// symmetric partial onto b's. Aliased rows cancel to zero naturally.
void add_pair_grad(GradMap& grads, const EmbeddingTable& table, RowKey a, RowKey b, double coeff,
                   int dim) {
    const auto x = row_of(table, a);
    const auto y = row_of(table, b);
    double dot = 0.0, sx = 0.0, sy = 0.0;
    for (int k = 0; k < dim; ++k) {
        dot += x[k] * y[k];
        sx += x[k] * x[k];
        sy += y[k] * y[k];
    }
    const double denom = std::sqrt(sx) * std::sqrt(sy);
    if (denom < 1e-12) return;  // inside the epsilon guard the loss is flat
    const double sim = dot / denom;

    // element addresses in unordered_map survive rehashing
    std::vector<double>& gx =
        grads.try_emplace(a.packed(), static_cast<std::size_t>(dim), 0.0).first->second;
    std::vector<double>& gy =
        grads.try_emplace(b.packed(), static_cast<std::size_t>(dim), 0.0).first->second;
    for (int k = 0; k < dim; ++k) {
        gx[k] += coeff * (sim * x[k] / sx - y[k] / denom);
        gy[k] += coeff * (sim * y[k] / sy - x[k] / denom);
    }
}

void add_sample_grad(GradMap& grads, const EmbeddingTable& table, const TripletSample& s,
                     const TrainConfig& cfg, double lam1, double lam2) {
    const double w = cfg.uniform_weights ? 1.0 : s.weight;
    const SampleHinges h = hinges_for(table, s, cfg.margin, lam1 > 0.0, lam2 > 0.0);

    const RowKey ua{true, s.anchor_user}, up{true, s.pos_user}, un{true, s.neg_user};
    const RowKey sp{false, s.pos_track}, sn{false, s.neg_track}, sa{false, s.aux_track};

    if (h.h_ui > 0.0) {
        add_pair_grad(grads, table, ua, sp, w, cfg.dim);
        add_pair_grad(grads, table, ua, sn, -w, cfg.dim);
    }
    if (lam1 > 0.0 && h.h_uu > 0.0) {
        add_pair_grad(grads, table, ua, up, w * lam1, cfg.dim);
        add_pair_grad(grads, table, ua, un, -w * lam1, cfg.dim);
    }
    if (lam2 > 0.0 && h.h_ii > 0.0) {
        add_pair_grad(grads, table, sa, sp, w * lam2, cfg.dim);
        add_pair_grad(grads, table, sa, sn, -w * lam2, cfg.dim);
    }
}

/// Post-update hygiene for one row: divergence aborts, an exact-zero row is
/// re-jittered so cosine stays defined.
void check_row(EmbeddingTable& table, RowKey key) {
    const auto row = row_of(table, key);
    bool all_zero = true;
    for (const double v : row) {
        if (!std::isfinite(v))
            throw Error("sgd_step: training diverged (non-finite embedding value); "
                        "reduce the learning rate");
        if (v != 0.0) all_zero = false;
    }
    if (all_zero) {
        Rng rng(mix_seed(0x6a697474ULL, key.packed()));
        for (double& v : row_of(table, key)) v = rng.uniform(-1e-4, 1e-4);
        TR_LOG_DEBUG("sgd_step: re-jittered an embedding row that collapsed to zero");
    }
}

}  // namespace

LossBreakdown loss_on_batch(const EmbeddingTable& table, const std::vector<TripletSample>& batch,
                            const TrainConfig& cfg) {
    if (batch.empty()) throw Error("loss_on_batch: empty batch");
    const double lam1 = cfg.no_user_loss ? 0.0 : cfg.lambda1;
    const double lam2 = cfg.no_item_loss ? 0.0 : cfg.lambda2;

    LossBreakdown out;
    out.samples = batch.size();
    std::size_t active = 0;
    for (const TripletSample& s : batch) {
        const double w = cfg.uniform_weights ? 1.0 : s.weight;
        const SampleHinges h = hinges_for(table, s, cfg.margin, lam1 > 0.0, lam2 > 0.0);
        out.term_user_item += w * h.h_ui;
        out.term_user_user += w * lam1 * h.h_uu;
        out.term_item_item += w * lam2 * h.h_ii;
        if (h.h_ui > 0.0 || (lam1 > 0.0 && h.h_uu > 0.0) || (lam2 > 0.0 && h.h_ii > 0.0)) ++active;
    }
    out.total = out.term_user_item + out.term_user_user + out.term_item_item;
    out.active_fraction = static_cast<double>(active) / static_cast<double>(batch.size());
    return out;
}

GradMap batch_gradient(const EmbeddingTable& table, const std::vector<TripletSample>& batch,
                       const TrainConfig& cfg) {
    const double lam1 = cfg.no_user_loss ? 0.0 : cfg.lambda1;
    const double lam2 = cfg.no_item_loss ? 0.0 : cfg.lambda2;
    GradMap grads;
    for (const TripletSample& s : batch) add_sample_grad(grads, table, s, cfg, lam1, lam2);
    return grads;
}

LossBreakdown sgd_step(EmbeddingTable& table, const std::vector<TripletSample>& batch,
                       const TrainConfig& cfg) {
    const LossBreakdown pre = loss_on_batch(table, batch, cfg);
    const double lam1 = cfg.no_user_loss ? 0.0 : cfg.lambda1;
    const double lam2 = cfg.no_item_loss ? 0.0 : cfg.lambda2;

    if (cfg.workers <= 1) {
        const GradMap grads = batch_gradient(table, batch, cfg);
        for (const auto& [packed, g] : grads) {
            const RowKey key = RowKey::unpack(packed);
            auto row = row_of(table, key);
            for (int k = 0; k < cfg.dim; ++k) row[k] -= cfg.lr * g[k];
            check_row(table, key);
        }
        return pre;
    }

    // Hogwild-style: per-sample sparse updates, races tolerated.
#ifdef _OPENMP
#pragma omp parallel for num_threads(cfg.workers) schedule(static)
#endif
    for (std::size_t i = 0; i < batch.size(); ++i) {
        GradMap grads;
        add_sample_grad(grads, table, batch[i], cfg, lam1, lam2);
        for (const auto& [packed, g] : grads) {
            auto row = row_of(table, RowKey::unpack(packed));
            for (int k = 0; k < cfg.dim; ++k) row[k] -= cfg.lr * g[k];
        }
    }
    for (std::uint32_t u = 0; u < table.num_users; ++u) check_row(table, {true, u});
    for (std::uint32_t t = 0; t < table.num_items; ++t) check_row(table, {false, t});
    return pre;
}

EmbeddingTable train(const InteractionStore& store, EmbeddingTable init, const WeightModel* weights,
                     const TrainConfig& cfg, std::uint64_t seed, std::vector<EpochStats>* trace) {
    cfg.validate();
    if (init.dim != cfg.dim)
        throw Error("train: init table dimension " + std::to_string(init.dim) +
                    " does not match configured dimension " + std::to_string(cfg.dim));
    if (init.num_users != store.num_users() || init.num_items != store.num_tracks())
        throw Error("train: init table shape does not match the store");
    if (cfg.epochs == 0) return init;
    if (store.interactions.empty()) throw Error("train: store has no interactions");

    EmbeddingTable table = std::move(init);
    Rng rng(mix_seed(seed, 0x747261696eULL));
    const WeightModel* sample_weights = cfg.uniform_weights ? nullptr : weights;
    const std::size_t batches_per_epoch =
        (store.interactions.size() + cfg.batch_size - 1) / cfg.batch_size;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const NeighborIndex index = build_neighbor_index(
            table, cfg.neighbors, cfg.workers, static_cast<std::uint64_t>(epoch) + 1);

        double sum_total = 0.0, sum_ui = 0.0, sum_uu = 0.0, sum_ii = 0.0;
        double active_weighted = 0.0;
        std::size_t samples = 0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const std::vector<TripletSample> batch =
                sample_batch(store, index, sample_weights, cfg.batch_size, rng);
            const LossBreakdown loss = sgd_step(table, batch, cfg);
            sum_total += loss.total;
            sum_ui += loss.term_user_item;
            sum_uu += loss.term_user_user;
            sum_ii += loss.term_item_item;
            active_weighted += loss.active_fraction * static_cast<double>(loss.samples);
            samples += loss.samples;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.samples = samples;
        const double n = static_cast<double>(samples);
        stats.mean_total = sum_total / n;
        stats.mean_user_item = sum_ui / n;
        stats.mean_user_user = sum_uu / n;
        stats.mean_item_item = sum_ii / n;
        stats.active_fraction = active_weighted / n;
        if (trace) trace->push_back(stats);
        TR_LOG_INFO("epoch %d/%d: mean loss %.6f (ui %.6f, uu %.6f, ii %.6f), active %.3f",
                    epoch + 1, cfg.epochs, stats.mean_total, stats.mean_user_item,
                    stats.mean_user_user, stats.mean_item_item, stats.active_fraction);
    }
    return table;
}

}  // namespace tripletrec
