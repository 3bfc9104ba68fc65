#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tripletrec/recommender.hpp"
#include "tripletrec/store.hpp"

namespace tripletrec {

using Heldout = std::vector<std::pair<std::uint32_t, std::uint32_t>>;  // (user, track)

/// 1 - sum(p^2) over the multiset's class counts; 0 for a single class,
/// approaches 1 as classes even out.
double gini_impurity(const std::vector<std::int64_t>& counts);

double hit_rate_at_k(const std::vector<RecommendationList>& recommendations,
                     const Heldout& heldout, std::size_t k);

/// Mean of 1/rank of the held-out track, 0 when it is absent from the list.
double mrr(const std::vector<RecommendationList>& recommendations, const Heldout& heldout);

/// user ordinal -> group label; must cover every evaluated user.
struct Partition {
    std::string name;
    std::unordered_map<std::uint32_t, std::string> group_of_user;
};

struct GroupMissRate {
    std::size_t size = 0;
    double miss_rate = 0.0;
};

struct MredResult {
    double value = 0.0;  // always <= 0
    std::map<std::string, GroupMissRate> groups;  // groups that met min_group_size
};

/// Miss Rate Equality Difference: -(1/|G|) * sum_g |MR_g - MR_overall| at
/// cutoff k. Groups smaller than min_group_size are dropped; it is an error
/// when none survives.
MredResult mred(const std::vector<RecommendationList>& recommendations, const Heldout& heldout,
                const Partition& partition, std::size_t k, std::size_t min_group_size = 10);

Partition partition_by_gender(const InteractionStore& store, const Heldout& heldout);
Partition partition_by_country(const InteractionStore& store, const Heldout& heldout);
// Decile partitions are computed on the training fold only. Track and artist
// partitions group users by their held-out item's popularity decile.
Partition partition_by_activity_decile(const InteractionStore& train, const Heldout& heldout);
Partition partition_by_track_pop_decile(const InteractionStore& train, const Heldout& heldout);
Partition partition_by_artist_pop_decile(const InteractionStore& train, const Heldout& heldout);

struct FoldMetrics {
    int fold_id = 0;
    double hit_rate = 0.0;
    double mrr = 0.0;
    std::map<std::string, double> mred;  // partition name -> value
    std::map<std::string, std::map<std::string, GroupMissRate>> mred_groups;
};

struct ConsistencyReport {
    std::map<std::string, double> per_metric;
    std::vector<std::string> undefined;  // |mean| below tolerance, excluded
    double overall = 0.0;  // arithmetic mean of the defined per-metric values
    int folds = 0;
    bool squared = false;
};

/// Per metric: 1 - sigma/|mu| across folds (population sigma), or
/// 1 - sigma^2/mu^2 when squared is set. A metric constant across folds
/// scores exactly 1. Requires >= 2 folds reporting the same metric set.
ConsistencyReport consistency(const std::vector<FoldMetrics>& folds, bool squared = false);

/// Pearson correlation between each user's history artist-impurity and the
/// impurity of their recommended list. nullopt (with a warning) when either
/// marginal has zero variance; error with fewer than 3 valid pairs.
std::optional<double> variance_agreement(const InteractionStore& train,
                                         const std::vector<RecommendationList>& recommendations);

}  // namespace tripletrec
