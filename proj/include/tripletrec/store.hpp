#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tripletrec {

enum class Gender : std::uint8_t { male = 0, female = 1, undisclosed = 2 };

const char* gender_name(Gender g);

struct User {
    std::string id;
    Gender gender = Gender::undisclosed;
    std::string country;  // may be empty
    std::int64_t playcount_total = 0;
};

struct Track {
    std::string id;
    std::string artist_id;
    std::string album_id;  // may be empty
};

struct Interaction {
    std::uint32_t user = 0;
    std::uint32_t track = 0;
    std::int64_t play_count = 0;
};

/// Deduplicated interaction records with inverted indices. Ordinals are
/// assigned once (entities sorted by id) and never change for the store's
/// lifetime; fold views below reuse them. Immutable after construction,
/// safe for concurrent reads.
struct InteractionStore {
    std::vector<User> users;
    std::vector<Track> tracks;
    std::vector<Interaction> interactions;  // sorted by (user, track), unique

    std::vector<std::vector<std::uint32_t>> tracks_of_user;  // sorted track ordinals
    std::vector<std::vector<std::uint32_t>> users_of_track;  // sorted user ordinals
    std::unordered_map<std::string, std::vector<std::uint32_t>> tracks_of_artist;

    std::unordered_map<std::string, std::uint32_t> user_ordinal;
    std::unordered_map<std::string, std::uint32_t> track_ordinal;

    std::vector<std::int64_t> plays_of_track;       // summed play_count per track
    std::vector<std::uint32_t> active_users;        // ordinals with >= 1 interaction
    std::vector<std::uint32_t> tracks_with_listeners;  // sorted ordinals

    std::size_t num_users() const { return users.size(); }
    std::size_t num_tracks() const { return tracks.size(); }

    bool user_listened(std::uint32_t user, std::uint32_t track) const;
};

/// Rebuilds every index from users/tracks/interactions. Merges duplicate
/// (user, track) rows by summing play_count and recomputes playcount totals.
void finalize_store(InteractionStore& store);

bool stores_equal(const InteractionStore& a, const InteractionStore& b);

InteractionStore load_store(const std::string& interactions_path,
                            const std::string& users_path,
                            const std::string& tracks_path);

void write_store(const InteractionStore& store, const std::string& dir);

struct FoldSplit {
    int fold_id = 0;
    InteractionStore train;  // same users/tracks and ordinals as the source store
    std::vector<std::pair<std::uint32_t, std::uint32_t>> heldout;  // (user, track), user-ascending
};

/// Per-user leave-one-out folds. Only users with >= 2 distinct tracks are
/// eligible; each fold holds out one uniformly drawn track per eligible
/// user. Folds differ only in their derived RNG stream.
std::vector<FoldSplit> make_folds(const InteractionStore& store, int k_folds, std::uint64_t seed);

struct PlantedConfig {
    int num_groups = 4;
    int users_per_group = 125;
    int artists_per_group = 25;
    int tracks_per_artist = 20;
    int interactions_per_user = 40;
    double crossover_rate = 0.1;
    std::uint64_t seed = 1;

    // Per-user taste: own-group draws target a random subset of the group's
    // artists, between 1 and max_preferred_artists of them. Varying subset
    // sizes give users a spread of history diversity.
    int max_preferred_artists = 8;

    // Demographic skew so the per-group evaluation partitions are non-trivial.
    std::array<double, 3> gender_weights{0.55, 0.35, 0.10};
    int num_countries = 8;
    double country_decay = 0.65;  // country i gets weight decay^i

    int max_play_count = 4;
};

/// Synthesizes a store with planted group structure: artists are partitioned
/// across groups, and each user draws interactions from their own group's
/// artists except for a crossover_rate fraction drawn uniformly from the
/// whole catalog.
InteractionStore generate_planted(const PlantedConfig& cfg);

}  // namespace tripletrec
