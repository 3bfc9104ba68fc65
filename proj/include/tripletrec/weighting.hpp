#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tripletrec/store.hpp"

namespace tripletrec {

struct ThetaWeights {
    double gender = 5.0;
    double country = 100.0;
    double artist = 1e4;
    double song = 1e5;
    double activity = 1e4;
};

/// Five rarity coefficient maps, each normalized to sum to 1 over its
/// population, plus the theta mixing weights and the normalizer that makes
/// the mean combined weight over the training interactions equal 1.
///
/// Raw coefficients: gender uses 1/count; country, artist, song and
/// activity use 1/(1 + ln(count)) with counts of, respectively, users per
/// country, total plays of the artist's tracks, total plays of the song,
/// and distinct songs per user.
struct WeightModel {
    ThetaWeights theta;

    std::array<double, 3> gender_coef{0.0, 0.0, 0.0};  // indexed by Gender; 0 = absent
    std::unordered_map<std::string, double> country_coef;
    std::unordered_map<std::string, double> artist_coef;
    std::vector<double> song_coef;      // by track ordinal; 0 = never played
    std::vector<double> activity_coef;  // by user ordinal; 0 = no interactions

    double normalizer = 1.0;  // mean un-normalized weight over training rows

    // Combined theta-weighted parts cached per ordinal; row weight is
    // (user_part[u] + track_part[t]) / normalizer.
    std::vector<double> user_part;
    std::vector<double> track_part;
};

WeightModel fit_weight_model(const InteractionStore& store, const ThetaWeights& theta);

/// Weight of the training row (user, track). Errors if either entity is
/// unknown to the model (no interactions in the fitted store).
double row_weight(const WeightModel& model, std::uint32_t user, std::uint32_t track);

}  // namespace tripletrec
