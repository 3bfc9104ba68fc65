#include "tripletrec/weighting.hpp"

#include <cmath>

#include "tripletrec/error.hpp"

namespace tripletrec {

namespace {

/// 1 / (1 + ln(count)); callers skip zero counts.
inline double damped_inverse(double count) { return 1.0 / (1.0 + std::log(count)); }

template <typename Map>
void normalize_map(Map& m) {
    double sum = 0.0;
    for (const auto& [key, v] : m) sum += v;
    if (sum <= 0.0) return;
    for (auto& [key, v] : m) v /= sum;
}

void normalize_vec(std::vector<double>& v) {
    double sum = 0.0;
    for (const double x : v) sum += x;
    if (sum <= 0.0) return;
    for (double& x : v) x /= sum;
}

}  // namespace

WeightModel fit_weight_model(const InteractionStore& store, const ThetaWeights& theta) {
    if (store.interactions.empty()) throw Error("fit_weight_model: store has no interactions");

    WeightModel model;
    model.theta = theta;

    // gender: raw 1/count over the three classes, absent classes dropped
    {
        std::array<std::size_t, 3> counts{0, 0, 0};
        for (const User& u : store.users) ++counts[static_cast<std::size_t>(u.gender)];
        double sum = 0.0;
        for (std::size_t g = 0; g < 3; ++g) {
            model.gender_coef[g] = counts[g] > 0 ? 1.0 / static_cast<double>(counts[g]) : 0.0;
            sum += model.gender_coef[g];
        }
        for (double& v : model.gender_coef) v /= sum;
    }

    // country: users per country
    {
        std::unordered_map<std::string, std::size_t> counts;
        for (const User& u : store.users) ++counts[u.country];
        for (const auto& [country, n] : counts)
            model.country_coef.emplace(country, damped_inverse(static_cast<double>(n)));
        normalize_map(model.country_coef);
    }

    // artist: total plays across the artist's tracks
    {
        std::unordered_map<std::string, std::int64_t> plays;
        for (std::uint32_t t = 0; t < store.num_tracks(); ++t)
            plays[store.tracks[t].artist_id] += store.plays_of_track[t];
        for (const auto& [artist, n] : plays)
            if (n > 0) model.artist_coef.emplace(artist, damped_inverse(static_cast<double>(n)));
        normalize_map(model.artist_coef);
    }

    // song: total plays of the track
    {
        model.song_coef.assign(store.num_tracks(), 0.0);
        for (std::uint32_t t = 0; t < store.num_tracks(); ++t)
            if (store.plays_of_track[t] > 0)
                model.song_coef[t] = damped_inverse(static_cast<double>(store.plays_of_track[t]));
        normalize_vec(model.song_coef);
    }

    // activity: distinct songs the user listened to
    {
        model.activity_coef.assign(store.num_users(), 0.0);
        for (std::uint32_t u = 0; u < store.num_users(); ++u) {
            const std::size_t n = store.tracks_of_user[u].size();
            if (n > 0) model.activity_coef[u] = damped_inverse(static_cast<double>(n));
        }
        normalize_vec(model.activity_coef);
    }

    // cache the per-entity halves of the unnormalized weight
    model.user_part.resize(store.num_users());
    for (std::uint32_t u = 0; u < store.num_users(); ++u) {
        const User& user = store.users[u];
        double part = theta.gender * model.gender_coef[static_cast<std::size_t>(user.gender)];
        const auto cit = model.country_coef.find(user.country);
        if (cit != model.country_coef.end()) part += theta.country * cit->second;
        part += theta.activity * model.activity_coef[u];
        model.user_part[u] = part;
    }
    model.track_part.resize(store.num_tracks());
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t) {
        double part = theta.song * model.song_coef[t];
        const auto ait = model.artist_coef.find(store.tracks[t].artist_id);
        if (ait != model.artist_coef.end()) part += theta.artist * ait->second;
        model.track_part[t] = part;
    }

    // normalizer: mean raw weight over training interactions must be 1
    double sum = 0.0;
    for (const Interaction& it : store.interactions)
        sum += model.user_part[it.user] + model.track_part[it.track];
    model.normalizer = sum / static_cast<double>(store.interactions.size());
    if (!(model.normalizer > 0.0)) throw Error("fit_weight_model: degenerate weight normalizer");

    return model;
}

double row_weight(const WeightModel& model, std::uint32_t user, std::uint32_t track) {
    if (user >= model.user_part.size() || track >= model.track_part.size())
        throw Error("row_weight: entity ordinal out of range");
    return (model.user_part[user] + model.track_part[track]) / model.normalizer;
}

}  // namespace tripletrec
