#include "tripletrec/store.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "tripletrec/error.hpp"
#include "tripletrec/rng.hpp"

namespace tripletrec {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

[[noreturn]] void row_error(const std::string& path, std::size_t line_no, const std::string& what) {
    throw Error(path + ":" + std::to_string(line_no) + ": " + what);
}

struct CsvReader {
    std::ifstream in;
    std::string path;
    std::size_t line_no = 0;

    CsvReader(const std::string& p, const std::string& expected_header) : in(p), path(p) {
        if (!in) throw Error("cannot open file: " + p);
        std::string header;
        if (!std::getline(in, header)) throw Error(p + ": empty file, expected header '" + expected_header + "'");
        ++line_no;
        // tolerate a UTF-8 BOM and CRLF endings
        if (header.size() >= 3 && header.compare(0, 3, "\xef\xbb\xbf") == 0) header.erase(0, 3);
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != expected_header)
            row_error(path, line_no, "expected header '" + expected_header + "', got '" + header + "'");
    }

    bool next(std::vector<std::string>& fields, std::size_t expected_fields) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_csv_line(line);
            if (fields.size() != expected_fields)
                row_error(path, line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                             std::to_string(fields.size()));
            return true;
        }
        return false;
    }
};

std::int64_t parse_count(const std::string& s, const std::string& path, std::size_t line_no) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        row_error(path, line_no, "invalid play_count '" + s + "'");
    if (value < 1) row_error(path, line_no, "play_count must be >= 1, got " + s);
    return value;
}

Gender parse_gender(const std::string& s) {
    if (s == "m") return Gender::male;
    if (s == "f") return Gender::female;
    return Gender::undisclosed;  // "n" and anything unknown
}

}  // namespace

const char* gender_name(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::undisclosed: return "undisclosed";
    }
    return "?";
}

bool InteractionStore::user_listened(std::uint32_t user, std::uint32_t track) const {
    const auto& hist = tracks_of_user[user];
    return std::binary_search(hist.begin(), hist.end(), track);
}

void finalize_store(InteractionStore& store) {
    const std::size_t nu = store.users.size();
    const std::size_t nt = store.tracks.size();

    store.user_ordinal.clear();
    store.track_ordinal.clear();
    store.user_ordinal.reserve(nu);
    store.track_ordinal.reserve(nt);
    for (std::uint32_t i = 0; i < nu; ++i) {
        if (!store.user_ordinal.emplace(store.users[i].id, i).second)
            throw Error("duplicate user id '" + store.users[i].id + "'");
    }
    for (std::uint32_t i = 0; i < nt; ++i) {
        if (!store.track_ordinal.emplace(store.tracks[i].id, i).second)
            throw Error("duplicate track id '" + store.tracks[i].id + "'");
        if (store.tracks[i].artist_id.empty())
            throw Error("track '" + store.tracks[i].id + "' has empty artist_id");
    }

    // merge duplicate (user, track) rows
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> merged;
    for (const Interaction& it : store.interactions) {
        if (it.user >= nu) throw Error("interaction references user ordinal out of range");
        if (it.track >= nt) throw Error("interaction references track ordinal out of range");
        merged[{it.user, it.track}] += it.play_count;
    }
    store.interactions.clear();
    store.interactions.reserve(merged.size());
    for (const auto& [key, plays] : merged)
        store.interactions.push_back({key.first, key.second, plays});

    store.tracks_of_user.assign(nu, {});
    store.users_of_track.assign(nt, {});
    store.plays_of_track.assign(nt, 0);
    for (auto& u : store.users) u.playcount_total = 0;
    for (const Interaction& it : store.interactions) {
        store.tracks_of_user[it.user].push_back(it.track);
        store.users_of_track[it.track].push_back(it.user);
        store.plays_of_track[it.track] += it.play_count;
        store.users[it.user].playcount_total += it.play_count;
    }
    // interactions are (user, track) sorted, so the index vectors are already
    // sorted and unique; users_of_track needs the per-track sort.
    for (auto& listeners : store.users_of_track) std::sort(listeners.begin(), listeners.end());

    store.tracks_of_artist.clear();
    for (std::uint32_t t = 0; t < nt; ++t)
        store.tracks_of_artist[store.tracks[t].artist_id].push_back(t);

    store.active_users.clear();
    for (std::uint32_t u = 0; u < nu; ++u)
        if (!store.tracks_of_user[u].empty()) store.active_users.push_back(u);

    store.tracks_with_listeners.clear();
    for (std::uint32_t t = 0; t < nt; ++t)
        if (!store.users_of_track[t].empty()) store.tracks_with_listeners.push_back(t);
}

bool stores_equal(const InteractionStore& a, const InteractionStore& b) {
    if (a.users.size() != b.users.size() || a.tracks.size() != b.tracks.size() ||
        a.interactions.size() != b.interactions.size())
        return false;
    for (std::size_t i = 0; i < a.users.size(); ++i) {
        const User &x = a.users[i], &y = b.users[i];
        if (x.id != y.id || x.gender != y.gender || x.country != y.country ||
            x.playcount_total != y.playcount_total)
            return false;
    }
    for (std::size_t i = 0; i < a.tracks.size(); ++i) {
        const Track &x = a.tracks[i], &y = b.tracks[i];
        if (x.id != y.id || x.artist_id != y.artist_id || x.album_id != y.album_id) return false;
    }
    for (std::size_t i = 0; i < a.interactions.size(); ++i) {
        const Interaction &x = a.interactions[i], &y = b.interactions[i];
        if (x.user != y.user || x.track != y.track || x.play_count != y.play_count) return false;
    }
    return true;
}

InteractionStore load_store(const std::string& interactions_path, const std::string& users_path,
                            const std::string& tracks_path) {
    InteractionStore store;

    {
        CsvReader reader(users_path, "user_id,gender,country");
        std::vector<std::string> f;
        while (reader.next(f, 3)) {
            if (f[0].empty()) row_error(users_path, reader.line_no, "empty user_id");
            store.users.push_back({f[0], parse_gender(f[1]), f[2], 0});
        }
    }
    {
        CsvReader reader(tracks_path, "track_id,artist_id,album_id");
        std::vector<std::string> f;
        while (reader.next(f, 3)) {
            if (f[0].empty()) row_error(tracks_path, reader.line_no, "empty track_id");
            if (f[1].empty()) row_error(tracks_path, reader.line_no, "empty artist_id");
            store.tracks.push_back({f[0], f[1], f[2]});
        }
    }

    // deterministic ordinals: entities sorted by id
    std::sort(store.users.begin(), store.users.end(),
              [](const User& a, const User& b) { return a.id < b.id; });
    std::sort(store.tracks.begin(), store.tracks.end(),
              [](const Track& a, const Track& b) { return a.id < b.id; });

    std::unordered_map<std::string, std::uint32_t> user_ord, track_ord;
    for (std::uint32_t i = 0; i < store.users.size(); ++i) user_ord[store.users[i].id] = i;
    for (std::uint32_t i = 0; i < store.tracks.size(); ++i) track_ord[store.tracks[i].id] = i;

    {
        CsvReader reader(interactions_path, "user_id,track_id,play_count");
        std::vector<std::string> f;
        while (reader.next(f, 3)) {
            const auto u = user_ord.find(f[0]);
            if (u == user_ord.end()) row_error(interactions_path, reader.line_no, "unknown user id '" + f[0] + "'");
            const auto t = track_ord.find(f[1]);
            if (t == track_ord.end()) row_error(interactions_path, reader.line_no, "unknown track id '" + f[1] + "'");
            store.interactions.push_back({u->second, t->second, parse_count(f[2], interactions_path, reader.line_no)});
        }
    }

    finalize_store(store);
    return store;
}

void write_store(const InteractionStore& store, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    const auto open = [](const fs::path& p) {
        std::ofstream out(p);
        if (!out) throw Error("cannot write file: " + p.string());
        return out;
    };

    {
        auto out = open(fs::path(dir) / "users.csv");
        out << "user_id,gender,country\n";
        for (const User& u : store.users) {
            const char g = u.gender == Gender::male ? 'm' : (u.gender == Gender::female ? 'f' : 'n');
            out << u.id << ',' << g << ',' << u.country << '\n';
        }
    }
    {
        auto out = open(fs::path(dir) / "tracks.csv");
        out << "track_id,artist_id,album_id\n";
        for (const Track& t : store.tracks) out << t.id << ',' << t.artist_id << ',' << t.album_id << '\n';
    }
    {
        auto out = open(fs::path(dir) / "interactions.csv");
        out << "user_id,track_id,play_count\n";
        for (const Interaction& it : store.interactions)
            out << store.users[it.user].id << ',' << store.tracks[it.track].id << ',' << it.play_count << '\n';
    }
}

std::vector<FoldSplit> make_folds(const InteractionStore& store, int k_folds, std::uint64_t seed) {
    if (k_folds < 1) throw Error("k_folds must be >= 1");

    std::vector<std::uint32_t> eligible;
    for (std::uint32_t u = 0; u < store.num_users(); ++u)
        if (store.tracks_of_user[u].size() >= 2) eligible.push_back(u);
    if (eligible.empty()) throw Error("no user has >= 2 distinct tracks; cannot build folds");

    std::vector<FoldSplit> folds;
    folds.reserve(k_folds);
    for (int f = 0; f < k_folds; ++f) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
        FoldSplit fold;
        fold.fold_id = f;
        fold.heldout.reserve(eligible.size());

        std::unordered_set<std::uint64_t> held_pairs;
        held_pairs.reserve(eligible.size() * 2);
        for (const std::uint32_t u : eligible) {
            const auto& hist = store.tracks_of_user[u];
            const std::uint32_t t = hist[rng.bounded(hist.size())];
            fold.heldout.emplace_back(u, t);
            held_pairs.insert((static_cast<std::uint64_t>(u) << 32) | t);
        }

        fold.train.users = store.users;
        fold.train.tracks = store.tracks;
        for (const Interaction& it : store.interactions) {
            const std::uint64_t key = (static_cast<std::uint64_t>(it.user) << 32) | it.track;
            if (!held_pairs.contains(key)) fold.train.interactions.push_back(it);
        }
        finalize_store(fold.train);
        folds.push_back(std::move(fold));
    }
    return folds;
}

InteractionStore generate_planted(const PlantedConfig& cfg) {
    if (cfg.num_groups < 1 || cfg.users_per_group < 1 || cfg.artists_per_group < 1 ||
        cfg.tracks_per_artist < 1 || cfg.interactions_per_user < 1)
        throw Error("planted generator: all counts must be >= 1");
    if (cfg.crossover_rate < 0.0 || cfg.crossover_rate > 1.0)
        throw Error("planted generator: crossover_rate must be in [0, 1]");
    if (cfg.num_countries < 1 || cfg.max_play_count < 1 || cfg.max_preferred_artists < 1)
        throw Error("planted generator: invalid auxiliary parameter");

    const std::size_t total_users = static_cast<std::size_t>(cfg.num_groups) * cfg.users_per_group;
    const std::size_t total_artists = static_cast<std::size_t>(cfg.num_groups) * cfg.artists_per_group;
    const std::size_t total_tracks = total_artists * cfg.tracks_per_artist;

    const auto pad_id = [](char prefix, std::size_t n) {
        std::ostringstream os;
        os << prefix;
        std::string digits = std::to_string(n);
        for (std::size_t i = digits.size(); i < 6; ++i) os << '0';
        os << digits;
        return os.str();
    };

    Rng rng(mix_seed(cfg.seed, 0x706c616e74ULL));  // one stream drives the whole build
    InteractionStore store;

    std::vector<double> country_weights(cfg.num_countries);
    double cw = 1.0, cw_sum = 0.0;
    for (int i = 0; i < cfg.num_countries; ++i, cw *= cfg.country_decay) {
        country_weights[i] = cw;
        cw_sum += cw;
    }

    const auto draw_categorical = [&rng](const auto& weights, double total) {
        double r = rng.uniform() * total;
        std::size_t i = 0;
        for (; i + 1 < weights.size(); ++i) {
            if (r < weights[i]) break;
            r -= weights[i];
        }
        return i;
    };

    const double gender_total = cfg.gender_weights[0] + cfg.gender_weights[1] + cfg.gender_weights[2];

    store.users.reserve(total_users);
    for (std::size_t i = 0; i < total_users; ++i) {
        User u;
        u.id = pad_id('u', i);
        u.gender = static_cast<Gender>(draw_categorical(cfg.gender_weights, gender_total));
        u.country = "C" + std::to_string(draw_categorical(country_weights, cw_sum));
        store.users.push_back(std::move(u));
    }

    store.tracks.reserve(total_tracks);
    for (std::size_t a = 0; a < total_artists; ++a) {
        const std::string artist = pad_id('a', a);
        for (int j = 0; j < cfg.tracks_per_artist; ++j) {
            Track t;
            t.id = pad_id('t', a * cfg.tracks_per_artist + j);
            t.artist_id = artist;
            // group the artist's tracks into 8-track albums; leave the last
            // track of each artist without one to exercise the empty case
            if (j != cfg.tracks_per_artist - 1) t.album_id = artist + "_alb" + std::to_string(j / 8);
            store.tracks.push_back(std::move(t));
        }
    }

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> merged;
    for (std::size_t ui = 0; ui < total_users; ++ui) {
        const std::size_t group = ui / cfg.users_per_group;

        const int max_pref = std::min(cfg.max_preferred_artists, cfg.artists_per_group);
        const int pref_count = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_pref)));
        std::vector<std::uint32_t> group_artists(cfg.artists_per_group);
        for (int a = 0; a < cfg.artists_per_group; ++a)
            group_artists[a] = static_cast<std::uint32_t>(group * cfg.artists_per_group + a);
        rng.shuffle(group_artists.begin(), group_artists.end());
        group_artists.resize(pref_count);

        for (int i = 0; i < cfg.interactions_per_user; ++i) {
            std::uint32_t track;
            if (rng.uniform() < cfg.crossover_rate) {
                track = static_cast<std::uint32_t>(rng.bounded(total_tracks));
            } else {
                const std::uint32_t artist = group_artists[rng.bounded(group_artists.size())];
                track = static_cast<std::uint32_t>(artist * cfg.tracks_per_artist +
                                                   rng.bounded(static_cast<std::uint64_t>(cfg.tracks_per_artist)));
            }
            const std::int64_t plays = 1 + static_cast<std::int64_t>(rng.bounded(cfg.max_play_count));
            merged[{static_cast<std::uint32_t>(ui), track}] += plays;
        }
    }

    store.interactions.reserve(merged.size());
    for (const auto& [key, plays] : merged) store.interactions.push_back({key.first, key.second, plays});

    finalize_store(store);
    return store;
}

}  // namespace tripletrec
