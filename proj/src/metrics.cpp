#include "tripletrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tripletrec/error.hpp"
#include "tripletrec/log.hpp"

namespace tripletrec {

double gini_impurity(const std::vector<std::int64_t>& counts) {
    std::int64_t total = 0;
    for (const std::int64_t c : counts) total += c;
    if (total <= 0) return 0.0;
    double sum_sq = 0.0;
    for (const std::int64_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

using RecByUser = std::unordered_map<std::uint32_t, const RecommendationList*>;

RecByUser index_recommendations(const std::vector<RecommendationList>& recommendations) {
    RecByUser by_user;
    by_user.reserve(recommendations.size());
    for (const RecommendationList& r : recommendations) by_user[r.user] = &r;
    return by_user;
}

const RecommendationList& list_for(const RecByUser& by_user, std::uint32_t user) {
    const auto it = by_user.find(user);
    if (it == by_user.end())
        throw Error("metrics: no recommendation list for evaluated user ordinal " +
                    std::to_string(user));
    return *it->second;
}

/// 1-based rank of track in the top-k prefix of the list, 0 when absent.
std::size_t rank_in_top_k(const RecommendationList& list, std::uint32_t track, std::size_t k) {
    const std::size_t depth = std::min(k, list.tracks.size());
    for (std::size_t i = 0; i < depth; ++i)
        if (list.tracks[i] == track) return i + 1;
    return 0;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double hit_rate_at_k(const std::vector<RecommendationList>& recommendations,
                     const Heldout& heldout, std::size_t k) {
    if (heldout.empty()) throw Error("hit_rate_at_k: empty held-out set");
    if (k == 0) throw Error("hit_rate_at_k: k must be >= 1");
    const RecByUser by_user = index_recommendations(recommendations);
    std::size_t hits = 0;
    for (const auto& [user, track] : heldout) {
        const RecommendationList& list = list_for(by_user, user);
        if (list.tracks.size() < k)
            throw Error("hit_rate_at_k: list for user ordinal " + std::to_string(user) +
                        " is shorter than k");
        if (rank_in_top_k(list, track, k) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(heldout.size());
}

double mrr(const std::vector<RecommendationList>& recommendations, const Heldout& heldout) {
    if (heldout.empty()) throw Error("mrr: empty held-out set");
    const RecByUser by_user = index_recommendations(recommendations);
    double sum = 0.0;
    for (const auto& [user, track] : heldout) {
        const RecommendationList& list = list_for(by_user, user);
        const std::size_t rank = rank_in_top_k(list, track, list.tracks.size());
        if (rank > 0) sum += 1.0 / static_cast<double>(rank);
    }
    return sum / static_cast<double>(heldout.size());
}

MredResult mred(const std::vector<RecommendationList>& recommendations, const Heldout& heldout,
                const Partition& partition, std::size_t k, std::size_t min_group_size) {
    if (heldout.empty()) throw Error("mred: empty held-out set");
    const RecByUser by_user = index_recommendations(recommendations);

    struct Tally {
        std::size_t misses = 0;
        std::size_t size = 0;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& [user, track] : heldout) {
        const auto git = partition.group_of_user.find(user);
        if (git == partition.group_of_user.end())
            throw Error("mred: partition '" + partition.name +
                        "' does not cover evaluated user ordinal " + std::to_string(user));
        Tally& t = tallies[git->second];
        ++t.size;
        if (rank_in_top_k(list_for(by_user, user), track, k) == 0) ++t.misses;
    }

    // overall miss rate is taken over the groups large enough to report
    MredResult out;
    std::size_t total_misses = 0, total_users = 0;
    for (const auto& [group, t] : tallies) {
        if (t.size < min_group_size) continue;
        out.groups.emplace(group,
                           GroupMissRate{t.size, static_cast<double>(t.misses) /
                                                     static_cast<double>(t.size)});
        total_misses += t.misses;
        total_users += t.size;
    }
    if (out.groups.empty())
        throw Error("mred: no group in partition '" + partition.name + "' reaches minimum size " +
                    std::to_string(min_group_size));

    const double overall = static_cast<double>(total_misses) / static_cast<double>(total_users);
    double sum_abs = 0.0;
    for (const auto& [group, g] : out.groups) sum_abs += std::abs(g.miss_rate - overall);
    out.value = -sum_abs / static_cast<double>(out.groups.size());
    return out;
}

namespace {

/// Decile by rank against a training-fold population: the share of population
/// values strictly below v, mapped onto 0..9.
struct DecileScale {
    std::vector<double> sorted;

    explicit DecileScale(std::vector<double> values) : sorted(std::move(values)) {
        std::sort(sorted.begin(), sorted.end());
    }

    std::string label(double v) const {
        const auto below = static_cast<std::size_t>(
            std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
        const std::size_t d = std::min<std::size_t>(9, below * 10 / sorted.size());
        return "d" + std::to_string(d);
    }
};

}  // namespace

Partition partition_by_gender(const InteractionStore& store, const Heldout& heldout) {
    Partition p;
    p.name = "gender";
    for (const auto& [user, track] : heldout)
        p.group_of_user.emplace(user, gender_name(store.users[user].gender));
    return p;
}

Partition partition_by_country(const InteractionStore& store, const Heldout& heldout) {
    Partition p;
    p.name = "country";
    for (const auto& [user, track] : heldout)
        p.group_of_user.emplace(user, store.users[user].country);
    return p;
}

Partition partition_by_activity_decile(const InteractionStore& train, const Heldout& heldout) {
    std::vector<double> population;
    population.reserve(train.active_users.size());
    for (const std::uint32_t u : train.active_users)
        population.push_back(static_cast<double>(train.tracks_of_user[u].size()));
    if (population.empty()) throw Error("partition_by_activity_decile: empty training fold");
    const DecileScale scale(std::move(population));

    Partition p;
    p.name = "activity";
    for (const auto& [user, track] : heldout)
        p.group_of_user.emplace(
            user, scale.label(static_cast<double>(train.tracks_of_user[user].size())));
    return p;
}

Partition partition_by_track_pop_decile(const InteractionStore& train, const Heldout& heldout) {
    std::vector<double> population;
    population.reserve(train.num_tracks());
    for (std::uint32_t t = 0; t < train.num_tracks(); ++t)
        population.push_back(static_cast<double>(train.plays_of_track[t]));
    if (population.empty()) throw Error("partition_by_track_pop_decile: no tracks");
    const DecileScale scale(std::move(population));

    Partition p;
    p.name = "track_pop";
    for (const auto& [user, track] : heldout)
        p.group_of_user.emplace(user,
                                scale.label(static_cast<double>(train.plays_of_track[track])));
    return p;
}

Partition partition_by_artist_pop_decile(const InteractionStore& train, const Heldout& heldout) {
    std::unordered_map<std::string, double> artist_plays;
    for (std::uint32_t t = 0; t < train.num_tracks(); ++t)
        artist_plays[train.tracks[t].artist_id] +=
            static_cast<double>(train.plays_of_track[t]);
    if (artist_plays.empty()) throw Error("partition_by_artist_pop_decile: no artists");

    std::vector<double> population;
    population.reserve(artist_plays.size());
    for (const auto& [artist, plays] : artist_plays) population.push_back(plays);
    const DecileScale scale(std::move(population));

    Partition p;
    p.name = "artist_pop";
    for (const auto& [user, track] : heldout)
        p.group_of_user.emplace(
            user, scale.label(artist_plays.at(train.tracks[track].artist_id)));
    return p;
}

ConsistencyReport consistency(const std::vector<FoldMetrics>& folds, bool squared) {
    if (folds.size() < 2) throw Error("consistency: need at least 2 folds");

    std::map<std::string, std::vector<double>> series;
    series["hit_rate"] = {};
    series["mrr"] = {};
    for (const auto& [name, value] : folds.front().mred) series["mred_" + name] = {};

    for (const FoldMetrics& f : folds) {
        if (f.mred.size() != folds.front().mred.size())
            throw Error("consistency: folds report different metric sets");
        series["hit_rate"].push_back(f.hit_rate);
        series["mrr"].push_back(f.mrr);
        for (const auto& [name, value] : f.mred) {
            const auto it = series.find("mred_" + name);
            if (it == series.end())
                throw Error("consistency: folds report different metric sets");
            it->second.push_back(value);
        }
    }

    ConsistencyReport report;
    report.folds = static_cast<int>(folds.size());
    report.squared = squared;
    double sum = 0.0;
    std::size_t defined = 0;
    for (const auto& [name, values] : series) {
        const double n = static_cast<double>(values.size());
        double mean = 0.0;
        for (const double v : values) mean += v;
        mean /= n;
        double var = 0.0;
        for (const double v : values) var += (v - mean) * (v - mean);
        var /= n;  // population variance: the folds are the whole population

        if (std::abs(mean) < 1e-12) {
            report.undefined.push_back(name);
            TR_LOG_WARN("consistency: metric '%s' has near-zero mean; excluded from the overall",
                        name.c_str());
            continue;
        }
        const double value =
            squared ? 1.0 - var / (mean * mean) : 1.0 - std::sqrt(var) / std::abs(mean);
        report.per_metric.emplace(name, value);
        sum += value;
        ++defined;
    }
    if (defined > 0) report.overall = sum / static_cast<double>(defined);
    return report;
}

std::optional<double> variance_agreement(const InteractionStore& train,
                                         const std::vector<RecommendationList>& recommendations) {
    std::vector<double> g_user, g_model;
    std::unordered_map<std::string, std::int64_t> counts;

    const auto impurity_of_tracks = [&](const std::vector<std::uint32_t>& tracks) {
        counts.clear();
        for (const std::uint32_t t : tracks) ++counts[train.tracks[t].artist_id];
        std::vector<std::int64_t> values;
        values.reserve(counts.size());
        for (const auto& [artist, c] : counts) values.push_back(c);
        return gini_impurity(values);
    };

    for (const RecommendationList& r : recommendations) {
        const std::vector<std::uint32_t>& history = train.tracks_of_user[r.user];
        if (history.empty() || r.tracks.empty()) continue;
        g_user.push_back(impurity_of_tracks(history));
        g_model.push_back(impurity_of_tracks(r.tracks));
    }
    if (g_user.size() < 3)
        throw Error("variance_agreement: need at least 3 users with defined impurities, have " +
                    std::to_string(g_user.size()));

    const double r = pearson(g_user, g_model);
    if (std::isnan(r)) {
        TR_LOG_WARN("variance_agreement: a marginal has zero variance; correlation undefined");
        return std::nullopt;
    }
    return r;
}

}  // namespace tripletrec
