#include "tripletrec/sampler.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tripletrec/error.hpp"

namespace tripletrec {

namespace {

constexpr std::size_t kUserBlock = 128;  // bounds the per-pass candidate scratch

std::vector<double> user_norms(const EmbeddingTable& table) {
    std::vector<double> norms(table.num_users);
    for (std::uint32_t u = 0; u < table.num_users; ++u) {
        const auto row = table.user_row(u);
        double sq = 0.0;
        for (const double x : row) sq += x * x;
        norms[u] = std::sqrt(sq);
    }
    return norms;
}

inline double cosine_sim(std::span<const double> a, std::span<const double> b, double norm_a,
                         double norm_b) {
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return dot / std::max(norm_a * norm_b, 1e-12);
}

// higher similarity first; exact ties go to the lower ordinal
inline bool better(const std::pair<double, std::uint32_t>& a,
                   const std::pair<double, std::uint32_t>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
}

void select_row(const EmbeddingTable& table, const std::vector<double>& norms, std::uint32_t u,
                int n_per_user, std::vector<std::pair<double, std::uint32_t>>& cands,
                std::uint32_t* out) {
    cands.clear();
    const auto row = table.user_row(u);
    for (std::uint32_t v = 0; v < table.num_users; ++v) {
        if (v == u) continue;
        cands.emplace_back(cosine_sim(row, table.user_row(v), norms[u], norms[v]), v);
    }
    std::partial_sort(cands.begin(), cands.begin() + n_per_user, cands.end(), better);
    for (int i = 0; i < n_per_user; ++i) out[i] = cands[static_cast<std::size_t>(i)].second;
}

}  // namespace

NeighborIndex build_neighbor_index(const EmbeddingTable& table, int n_neighbors, int workers,
                                   std::uint64_t epoch_stamp) {
    if (n_neighbors < 1) throw Error("build_neighbor_index: n_neighbors must be >= 1");
    if (table.num_users < 2) throw Error("build_neighbor_index: need at least 2 users");

    NeighborIndex index;
    index.n_per_user = std::min<int>(n_neighbors, static_cast<int>(table.num_users) - 1);
    index.epoch_stamp = epoch_stamp;
    index.flat.resize(static_cast<std::size_t>(table.num_users) * index.n_per_user);

    const std::vector<double> norms = user_norms(table);

    for (std::uint32_t lo = 0; lo < table.num_users; lo += kUserBlock) {
        const std::uint32_t hi =
            std::min<std::uint32_t>(lo + kUserBlock, table.num_users);
#ifdef _OPENMP
#pragma omp parallel num_threads(std::max(workers, 1)) if (workers > 1)
        {
            std::vector<std::pair<double, std::uint32_t>> cands;
            cands.reserve(table.num_users);
#pragma omp for schedule(static)
            for (std::uint32_t u = lo; u < hi; ++u)
                select_row(table, norms, u, index.n_per_user, cands,
                           index.flat.data() + static_cast<std::size_t>(u) * index.n_per_user);
        }
#else
        (void)workers;
        std::vector<std::pair<double, std::uint32_t>> cands;
        cands.reserve(table.num_users);
        for (std::uint32_t u = lo; u < hi; ++u)
            select_row(table, norms, u, index.n_per_user, cands,
                       index.flat.data() + static_cast<std::size_t>(u) * index.n_per_user);
#endif
    }
    return index;
}

namespace reference {

NeighborIndex build_neighbor_index(const EmbeddingTable& table, int n_neighbors,
                                   std::uint64_t epoch_stamp) {
    if (n_neighbors < 1) throw Error("build_neighbor_index: n_neighbors must be >= 1");
    if (table.num_users < 2) throw Error("build_neighbor_index: need at least 2 users");

    NeighborIndex index;
    index.n_per_user = std::min<int>(n_neighbors, static_cast<int>(table.num_users) - 1);
    index.epoch_stamp = epoch_stamp;
    index.flat.resize(static_cast<std::size_t>(table.num_users) * index.n_per_user);

    const std::vector<double> norms = user_norms(table);
    for (std::uint32_t u = 0; u < table.num_users; ++u) {
        std::vector<std::pair<double, std::uint32_t>> cands;
        for (std::uint32_t v = 0; v < table.num_users; ++v) {
            if (v == u) continue;
            cands.emplace_back(cosine_sim(table.user_row(u), table.user_row(v), norms[u], norms[v]),
                               v);
        }
        std::sort(cands.begin(), cands.end(), better);
        for (int i = 0; i < index.n_per_user; ++i)
            index.flat[static_cast<std::size_t>(u) * index.n_per_user + i] =
                cands[static_cast<std::size_t>(i)].second;
    }
    return index;
}

}  // namespace reference

std::uint32_t sample_negative(const InteractionStore& store, const NeighborIndex& index,
                              std::uint32_t anchor_user, Rng& rng) {
    const std::vector<std::uint32_t>& history = store.tracks_of_user[anchor_user];

    std::vector<char> excluded(store.num_tracks(), 0);
    for (const std::uint32_t t : history) excluded[t] = 1;

    std::vector<std::uint32_t> pool;
    for (const std::uint32_t v : index.neighbors(anchor_user)) {
        for (const std::uint32_t t : store.tracks_of_user[v]) {
            if (!excluded[t]) {
                pool.push_back(t);
                excluded[t] = 1;  // dedup against later neighbors
            }
        }
    }
    if (!pool.empty()) {
        std::sort(pool.begin(), pool.end());
        return pool[rng.bounded(pool.size())];
    }

    // fallback: uniform over every track outside the anchor's history
    const std::size_t unlistened = store.num_tracks() - history.size();
    if (unlistened == 0)
        throw Error("sample_negative: user '" + store.users[anchor_user].id +
                    "' has listened to every track");
    std::uint64_t k = rng.bounded(unlistened);
    std::size_t h = 0;  // history is sorted ascending
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t) {
        if (h < history.size() && history[h] == t) {
            ++h;
            continue;
        }
        if (k == 0) return t;
        --k;
    }
    throw Error("sample_negative: internal fallback walk failed");
}

std::vector<TripletSample> sample_batch(const InteractionStore& store, const NeighborIndex& index,
                                        const WeightModel* weights, std::size_t batch_size,
                                        Rng& rng) {
    if (batch_size == 0) throw Error("sample_batch: batch_size must be >= 1");
    if (store.active_users.empty()) throw Error("sample_batch: store has no interactions");

    std::vector<TripletSample> batch;
    batch.reserve(batch_size);

    for (std::size_t i = 0; i < batch_size; ++i) {
        TripletSample s;
        s.anchor_user = store.active_users[rng.bounded(store.active_users.size())];
        const std::vector<std::uint32_t>& history = store.tracks_of_user[s.anchor_user];

        s.pos_track = history[rng.bounded(history.size())];
        s.neg_track = sample_negative(store, index, s.anchor_user, rng);

        if (history.size() == 1) {
            s.aux_track = s.pos_track;
        } else {
            const auto pos_at = static_cast<std::size_t>(
                std::lower_bound(history.begin(), history.end(), s.pos_track) - history.begin());
            std::uint64_t k = rng.bounded(history.size() - 1);
            if (k >= pos_at) ++k;  // skip s_p, stay uniform over the rest
            s.aux_track = history[k];
        }

        const std::vector<std::uint32_t>& pos_listeners = store.users_of_track[s.pos_track];
        if (pos_listeners.size() == 1) {
            s.pos_user = s.anchor_user;
        } else {
            const auto anchor_at = static_cast<std::size_t>(
                std::lower_bound(pos_listeners.begin(), pos_listeners.end(), s.anchor_user) -
                pos_listeners.begin());
            std::uint64_t k = rng.bounded(pos_listeners.size() - 1);
            if (k >= anchor_at) ++k;
            s.pos_user = pos_listeners[k];
        }

        const std::vector<std::uint32_t>& neg_listeners = store.users_of_track[s.neg_track];
        s.neg_user = neg_listeners.empty() ? s.pos_user
                                           : neg_listeners[rng.bounded(neg_listeners.size())];

        s.weight = weights ? row_weight(*weights, s.anchor_user, s.pos_track) : 1.0;
        batch.push_back(s);
    }
    return batch;
}

}  // namespace tripletrec
