#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tripletrec/embedding.hpp"
#include "tripletrec/rng.hpp"
#include "tripletrec/store.hpp"
#include "tripletrec/weighting.hpp"

namespace tripletrec {

/// Per-user nearest neighbors by cosine similarity of the current user
/// embeddings. Rebuilt only at epoch boundaries; the stamp records which.
struct NeighborIndex {
    int n_per_user = 0;  // min(N, num_users - 1)
    std::uint64_t epoch_stamp = 0;
    std::vector<std::uint32_t> flat;  // num_users x n_per_user

    std::span<const std::uint32_t> neighbors(std::uint32_t user) const {
        return {flat.data() + static_cast<std::size_t>(user) * n_per_user,
                static_cast<std::size_t>(n_per_user)};
    }
};

/// Exact top-N by cosine similarity, ties broken by lower ordinal. Works in
/// user blocks so the similarity scratch stays bounded; rows are independent,
/// so the parallel result is identical to the serial one.
NeighborIndex build_neighbor_index(const EmbeddingTable& table, int n_neighbors,
                                   int workers = 1, std::uint64_t epoch_stamp = 0);

namespace reference {
/// Naive all-pairs version kept as the test oracle and benchmark baseline.
NeighborIndex build_neighbor_index(const EmbeddingTable& table, int n_neighbors,
                                   std::uint64_t epoch_stamp = 0);
}  // namespace reference

struct TripletSample {
    std::uint32_t anchor_user = 0;  // u_a
    std::uint32_t pos_track = 0;    // s_p, listened by the anchor
    std::uint32_t neg_track = 0;    // s_n, never in the anchor's history
    std::uint32_t pos_user = 0;     // u_p, a listener of s_p
    std::uint32_t neg_user = 0;     // u_n, a listener of s_n
    std::uint32_t aux_track = 0;    // s_a, listened by the anchor
    double weight = 1.0;
};

/// Hard negative for the anchor: a uniform draw from the tracks the anchor's
/// neighbors listened to minus the anchor's own history. An empty pool falls
/// back to a uniform draw over all tracks the anchor never listened to.
/// Errors when the anchor listened to the entire catalog.
std::uint32_t sample_negative(const InteractionStore& store, const NeighborIndex& index,
                              std::uint32_t anchor_user, Rng& rng);

/// Draws batch_size triplet samples. Anchors are uniform over users with
/// history; weight is the anchor/positive row weight (1 when weights is
/// null). When the negative track has no listeners at all, neg_user is set
/// to pos_user; the two user-triplet distances then cancel, so the term
/// contributes no gradient.
std::vector<TripletSample> sample_batch(const InteractionStore& store,
                                        const NeighborIndex& index,
                                        const WeightModel* weights,
                                        std::size_t batch_size,
                                        Rng& rng);

}  // namespace tripletrec
