#include "tripletrec/recommender.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tripletrec/error.hpp"
#include "tripletrec/trainer.hpp"

namespace tripletrec {

namespace {

struct Scored {
    double distance;
    std::uint32_t track;
};

inline bool closer(const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.track < b.track;
}

std::vector<Scored> score_candidates(const EmbeddingTable& table, const InteractionStore& store,
                                     std::uint32_t user, bool exclude_history) {
    if (user >= store.num_users()) throw Error("recommender: user ordinal out of range");
    std::vector<char> skip(store.num_tracks(), 0);
    if (exclude_history)
        for (const std::uint32_t t : store.tracks_of_user[user]) skip[t] = 1;

    std::vector<Scored> scored;
    scored.reserve(store.num_tracks());
    const auto u = table.user_row(user);
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t) {
        if (skip[t]) continue;
        scored.push_back({cosine_distance(u, table.item_row(t)), t});
    }
    return scored;
}

}  // namespace

std::vector<std::uint32_t> rank_items(const EmbeddingTable& table, const InteractionStore& store,
                                      std::uint32_t user, bool exclude_history) {
    std::vector<Scored> scored = score_candidates(table, store, user, exclude_history);
    std::sort(scored.begin(), scored.end(), closer);
    std::vector<std::uint32_t> out;
    out.reserve(scored.size());
    for (const Scored& s : scored) out.push_back(s.track);
    return out;
}

std::vector<std::uint32_t> top_k_items(const EmbeddingTable& table, const InteractionStore& store,
                                       std::uint32_t user, std::size_t k, bool exclude_history) {
    std::vector<Scored> scored = score_candidates(table, store, user, exclude_history);
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), closer);
    std::vector<std::uint32_t> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].track);
    return out;
}

RecommendationList recommend(const EmbeddingTable& table, const InteractionStore& store,
                             std::uint32_t user, std::size_t k, std::size_t candidate_pool,
                             bool exclude_history, Rng& rng) {
    if (k == 0) throw Error("recommend: k must be >= 1");
    if (candidate_pool < k) throw Error("recommend: candidate_pool must be >= k");

    const std::vector<std::uint32_t> ranked = rank_items(table, store, user, exclude_history);
    if (ranked.size() < k)
        throw Error("recommend: only " + std::to_string(ranked.size()) +
                    " rankable tracks for user '" + store.users[user].id + "', need " +
                    std::to_string(k));

    // weight = 1 / (1-based rank in the full ordering); ranks never renumber
    const std::size_t pool = std::min(candidate_pool, ranked.size());
    std::vector<std::pair<double, std::uint32_t>> candidates;
    candidates.reserve(pool);
    for (std::size_t i = 0; i < pool; ++i)
        candidates.emplace_back(1.0 / static_cast<double>(i + 1), ranked[i]);

    RecommendationList list;
    list.user = user;
    list.tracks.reserve(k);
    for (std::size_t draw = 0; draw < k; ++draw) {
        double total = 0.0;
        for (const auto& [w, t] : candidates) total += w;
        const double r = rng.uniform() * total;
        double acc = 0.0;
        std::size_t picked = candidates.size() - 1;  // guards rounding at the top end
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            acc += candidates[i].first;
            if (r < acc) {
                picked = i;
                break;
            }
        }
        list.tracks.push_back(candidates[picked].second);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(picked));
    }
    return list;
}

std::vector<RecommendationList> top_k_for_users(const EmbeddingTable& table,
                                                const InteractionStore& store,
                                                const std::vector<std::uint32_t>& users,
                                                std::size_t k, bool exclude_history, int workers) {
    std::vector<RecommendationList> lists(users.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(workers, 1)) schedule(static) if (workers > 1)
#endif
    for (std::size_t i = 0; i < users.size(); ++i) {
        lists[i].user = users[i];
        lists[i].tracks = top_k_items(table, store, users[i], k, exclude_history);
    }
    return lists;
}

}  // namespace tripletrec
