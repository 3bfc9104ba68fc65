#pragma once

#include <cstdint>
#include <vector>

#include "tripletrec/embedding.hpp"
#include "tripletrec/rng.hpp"
#include "tripletrec/store.hpp"

namespace tripletrec {

/// Every candidate track ordered by ascending cosine distance to the user,
/// ties broken by lower ordinal. exclude_history drops the user's training
/// tracks from the candidate set.
std::vector<std::uint32_t> rank_items(const EmbeddingTable& table, const InteractionStore& store,
                                      std::uint32_t user, bool exclude_history);

/// First k of rank_items without sorting the full tail.
std::vector<std::uint32_t> top_k_items(const EmbeddingTable& table, const InteractionStore& store,
                                       std::uint32_t user, std::size_t k, bool exclude_history);

struct RecommendationList {
    std::uint32_t user = 0;
    std::vector<std::uint32_t> tracks;  // ordered by draw sequence
    std::uint64_t seed = 0;
};

/// k distinct tracks drawn without replacement from the top candidate_pool
/// of the ranking, with probability proportional to the inverse of each
/// track's 1-based rank. Errors when fewer than k tracks are rankable.
RecommendationList recommend(const EmbeddingTable& table, const InteractionStore& store,
                             std::uint32_t user, std::size_t k, std::size_t candidate_pool,
                             bool exclude_history, Rng& rng);

/// Deterministic top-k lists for a set of users; rows are independent, so
/// the parallel result equals the serial one.
std::vector<RecommendationList> top_k_for_users(const EmbeddingTable& table,
                                                const InteractionStore& store,
                                                const std::vector<std::uint32_t>& users,
                                                std::size_t k, bool exclude_history,
                                                int workers = 1);

}  // namespace tripletrec
