#include "tripletrec/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tripletrec/error.hpp"

namespace tripletrec {

ThetaWeights RunConfig::theta() const {
    ThetaWeights t;
    t.gender = theta_gender;
    t.country = theta_country;
    t.artist = theta_artist;
    t.song = theta_song;
    t.activity = theta_activity;
    return t;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.dim = dim;
    t.lambda1 = lambda1;
    t.lambda2 = lambda2;
    t.margin = margin;
    t.lr = lr;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.neighbors = neighbors_n;
    t.workers = workers;
    t.no_user_loss = no_user_loss;
    t.no_item_loss = no_item_loss;
    t.uniform_weights = uniform_weights;
    return t;
}

SkipgramConfig RunConfig::skipgram_config() const {
    SkipgramConfig s;
    s.dim = dim;
    s.window = init_window;
    s.negatives = init_negatives;
    s.epochs = init_epochs;
    s.lr = init_lr;
    s.workers = workers;
    return s;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_value(const std::string& text) {
    if constexpr (std::is_same_v<T, bool>) {
        if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
        if (text == "false" || text == "0" || text == "no" || text == "off") return false;
        throw Error("expected a boolean");
    } else if constexpr (std::is_same_v<T, double>) {
        double v{};
        const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size())
            throw Error("expected a number");
        return v;
    } else {
        T v{};
        const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || p != text.data() + text.size())
            throw Error("expected an integer");
        return v;
    }
}

// One row per key: a setter (parse from text) and a getter (format for echo).
struct KeyBinding {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
std::string format_value(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
        return v ? "true" : "false";
    } else {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }
}

template <typename T>
KeyBinding bind(T RunConfig::* field) {
    return {[field](RunConfig& cfg, const std::string& text) { cfg.*field = parse_value<T>(text); },
            [field](const RunConfig& cfg) { return format_value(cfg.*field); }};
}

const std::map<std::string, KeyBinding>& key_table() {
    static const std::map<std::string, KeyBinding> table = {
        {"dim", bind(&RunConfig::dim)},
        {"lambda1", bind(&RunConfig::lambda1)},
        {"lambda2", bind(&RunConfig::lambda2)},
        {"margin", bind(&RunConfig::margin)},
        {"lr", bind(&RunConfig::lr)},
        {"epochs", bind(&RunConfig::epochs)},
        {"batch_size", bind(&RunConfig::batch_size)},
        {"neighbors_n", bind(&RunConfig::neighbors_n)},
        {"theta_gender", bind(&RunConfig::theta_gender)},
        {"theta_country", bind(&RunConfig::theta_country)},
        {"theta_artist", bind(&RunConfig::theta_artist)},
        {"theta_song", bind(&RunConfig::theta_song)},
        {"theta_activity", bind(&RunConfig::theta_activity)},
        {"init_window", bind(&RunConfig::init_window)},
        {"init_negatives", bind(&RunConfig::init_negatives)},
        {"init_epochs", bind(&RunConfig::init_epochs)},
        {"init_lr", bind(&RunConfig::init_lr)},
        {"max_users_per_sentence", bind(&RunConfig::max_users_per_sentence)},
        {"rec_k", bind(&RunConfig::rec_k)},
        {"candidate_pool", bind(&RunConfig::candidate_pool)},
        {"exclude_history", bind(&RunConfig::exclude_history)},
        {"k_folds", bind(&RunConfig::k_folds)},
        {"min_group_size", bind(&RunConfig::min_group_size)},
        {"consistency_squared", bind(&RunConfig::consistency_squared)},
        {"stochastic_eval", bind(&RunConfig::stochastic_eval)},
        {"no_user_loss", bind(&RunConfig::no_user_loss)},
        {"no_item_loss", bind(&RunConfig::no_item_loss)},
        {"no_w2v_init", bind(&RunConfig::no_w2v_init)},
        {"uniform_weights", bind(&RunConfig::uniform_weights)},
        {"seed", bind(&RunConfig::seed)},
        {"workers", bind(&RunConfig::workers)},
    };
    return table;
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;

        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        // Echoed configs start with the command that produced them; accept
        // them as input so any run can be replayed from its own output.
        if (key == "command") continue;

        const auto it = key_table().find(key);
        if (it == key_table().end())
            throw Error(path + ":" + std::to_string(line_no) + ": unknown config key '" + key +
                        "'");
        try {
            it->second.set(cfg, value);
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": value '" + value + "' for '" +
                        key + "': " + e.what());
        }
    }
}

void save_resolved_config(const RunConfig& cfg, const std::string& command,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write config file '" + path + "'");
    out << "command = " << command << "\n";
    for (const auto& [key, binding] : key_table()) out << key << " = " << binding.get(cfg) << "\n";
    if (!out) throw Error("failed while writing config file '" + path + "'");
}

}  // namespace tripletrec
