#include "tripletrec/init.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tripletrec/error.hpp"
#include "tripletrec/log.hpp"
#include "tripletrec/rng.hpp"

namespace tripletrec {

std::vector<TokenSentence> build_corpus(const InteractionStore& store,
                                        std::size_t max_users_per_sentence, std::uint64_t seed) {
    if (store.num_tracks() == 0) throw Error("build_corpus: store has no tracks");

    Rng rng(mix_seed(seed, 0x636f7270ULL));
    std::vector<TokenSentence> corpus;
    corpus.reserve(store.tracks_with_listeners.size());

    std::vector<std::uint32_t> listeners;
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t) {
        listeners = store.users_of_track[t];
        if (listeners.empty()) continue;  // a song nobody listened to has no sentence

        TokenSentence sentence;
        const Track& track = store.tracks[t];
        sentence.tokens.push_back("song=" + track.id);
        sentence.tokens.push_back("artist=" + track.artist_id);
        if (!track.album_id.empty()) sentence.tokens.push_back("album=" + track.album_id);

        rng.shuffle(listeners.begin(), listeners.end());
        if (listeners.size() > max_users_per_sentence) listeners.resize(max_users_per_sentence);
        for (const std::uint32_t u : listeners) sentence.tokens.push_back("user=" + store.users[u].id);

        corpus.push_back(std::move(sentence));
    }
    return corpus;
}

namespace {

struct Vocab {
    std::vector<std::string> words;  // vid -> token, sorted
    std::unordered_map<std::string, std::uint32_t> id_of;
    std::vector<std::int64_t> counts;  // corpus occurrences per vid
};

Vocab build_vocab(const std::vector<TokenSentence>& corpus) {
    std::map<std::string, std::int64_t> counts;
    for (const TokenSentence& s : corpus)
        for (const std::string& tok : s.tokens) ++counts[tok];

    Vocab vocab;
    vocab.words.reserve(counts.size());
    vocab.counts.reserve(counts.size());
    for (const auto& [word, count] : counts) {
        vocab.id_of.emplace(word, static_cast<std::uint32_t>(vocab.words.size()));
        vocab.words.push_back(word);
        vocab.counts.push_back(count);
    }
    return vocab;
}

/// Cumulative table over counts^(3/4); sampled by binary search.
struct NegativeTable {
    std::vector<double> cumulative;

    explicit NegativeTable(const std::vector<std::int64_t>& counts) {
        cumulative.reserve(counts.size());
        double acc = 0.0;
        for (const std::int64_t c : counts) {
            acc += std::pow(static_cast<double>(c), 0.75);
            cumulative.push_back(acc);
        }
    }

    std::uint32_t draw(Rng& rng) const {
        const double r = rng.uniform() * cumulative.back();
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        const auto idx = static_cast<std::size_t>(it - cumulative.begin());
        return static_cast<std::uint32_t>(std::min(idx, cumulative.size() - 1));
    }
};

inline double sigmoid(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

// One skip-gram center: pull the context token, push `negatives` draws.
void train_pair(std::vector<double>& w_in, std::vector<double>& w_out, int dim,
                std::uint32_t center, std::uint32_t context, const NegativeTable& table,
                int negatives, double lr, Rng& rng, std::vector<double>& grad_center) {
    double* vc = w_in.data() + static_cast<std::size_t>(center) * dim;
    std::fill(grad_center.begin(), grad_center.end(), 0.0);

    const auto update_target = [&](std::uint32_t target, double label) {
        double* ut = w_out.data() + static_cast<std::size_t>(target) * dim;
        double dot = 0.0;
        for (int k = 0; k < dim; ++k) dot += vc[k] * ut[k];
        const double g = (label - sigmoid(dot)) * lr;
        for (int k = 0; k < dim; ++k) {
            grad_center[k] += g * ut[k];
            ut[k] += g * vc[k];
        }
    };

    update_target(context, 1.0);
    for (int n = 0; n < negatives; ++n) {
        const std::uint32_t neg = table.draw(rng);
        if (neg == context) continue;
        update_target(neg, 0.0);
    }
    for (int k = 0; k < dim; ++k) vc[k] += grad_center[k];
}

void train_sentence(const std::vector<std::uint32_t>& sentence, const SkipgramConfig& cfg,
                    std::vector<double>& w_in, std::vector<double>& w_out,
                    const NegativeTable& table, double lr, Rng& rng,
                    std::vector<double>& grad_scratch) {
    const int n = static_cast<int>(sentence.size());
    for (int i = 0; i < n; ++i) {
        int lo = 0, hi = n;
        if (cfg.window > 0) {
            lo = std::max(0, i - cfg.window);
            hi = std::min(n, i + cfg.window + 1);
        }
        for (int j = lo; j < hi; ++j) {
            if (j == i) continue;
            train_pair(w_in, w_out, cfg.dim, sentence[i], sentence[j], table, cfg.negatives, lr,
                       rng, grad_scratch);
        }
    }
}

}  // namespace

InitEmbeddings train_skipgram(const std::vector<TokenSentence>& corpus, const SkipgramConfig& cfg,
                              std::uint64_t seed) {
    if (corpus.empty()) throw Error("train_skipgram: empty corpus");
    if (cfg.dim < 2) throw Error("train_skipgram: dim must be >= 2");
    if (cfg.epochs < 0 || cfg.negatives < 0 || cfg.lr <= 0.0)
        throw Error("train_skipgram: invalid hyperparameters");

    const Vocab vocab = build_vocab(corpus);
    if (vocab.words.size() < 2) throw Error("train_skipgram: vocabulary has fewer than 2 tokens");

    // tokens to vocab ids once, up front
    std::vector<std::vector<std::uint32_t>> sentences;
    sentences.reserve(corpus.size());
    for (const TokenSentence& s : corpus) {
        std::vector<std::uint32_t> ids;
        ids.reserve(s.tokens.size());
        for (const std::string& tok : s.tokens) ids.push_back(vocab.id_of.at(tok));
        sentences.push_back(std::move(ids));
    }

    const NegativeTable table(vocab.counts);
    const std::size_t vocab_size = vocab.words.size();
    const int dim = cfg.dim;

    std::vector<double> w_in(vocab_size * dim);
    std::vector<double> w_out(vocab_size * dim, 0.0);
    {
        Rng rng(mix_seed(seed, 0x77327649ULL));
        const double bound = 0.5 / dim;
        for (double& v : w_in) v = rng.uniform(-bound, bound);
    }

    const double total_sentences = static_cast<double>(sentences.size()) * std::max(cfg.epochs, 1);
    std::size_t processed = 0;

    if (cfg.workers <= 1) {
        Rng rng(mix_seed(seed, 0x77327654ULL));
        std::vector<double> grad_scratch(dim);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (const auto& sentence : sentences) {
                const double progress = static_cast<double>(processed) / total_sentences;
                const double lr = cfg.lr * std::max(1.0 - progress, 1e-4);
                train_sentence(sentence, cfg, w_in, w_out, table, lr, rng, grad_scratch);
                ++processed;
            }
        }
    } else {
        // benign-race sharding; only the single-worker path is deterministic
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
#ifdef _OPENMP
#pragma omp parallel num_threads(cfg.workers)
            {
                Rng rng(mix_seed(seed, 0x773200ULL + epoch * 131 + omp_get_thread_num()));
                std::vector<double> grad_scratch(dim);
#pragma omp for schedule(static)
                for (std::size_t s = 0; s < sentences.size(); ++s) {
                    const double progress =
                        (static_cast<double>(epoch) * sentences.size() + s) / total_sentences;
                    const double lr = cfg.lr * std::max(1.0 - progress, 1e-4);
                    train_sentence(sentences[s], cfg, w_in, w_out, table, lr, rng, grad_scratch);
                }
            }
#else
            Rng rng(mix_seed(seed, 0x773200ULL + epoch * 131));
            std::vector<double> grad_scratch(dim);
            for (std::size_t s = 0; s < sentences.size(); ++s) {
                const double progress =
                    (static_cast<double>(epoch) * sentences.size() + s) / total_sentences;
                const double lr = cfg.lr * std::max(1.0 - progress, 1e-4);
                train_sentence(sentences[s], cfg, w_in, w_out, table, lr, rng, grad_scratch);
            }
#endif
        }
    }

    InitEmbeddings init;
    init.dim = dim;
    init.vectors.reserve(vocab_size);
    for (std::size_t v = 0; v < vocab_size; ++v) {
        std::vector<double> vec(w_in.begin() + v * dim, w_in.begin() + (v + 1) * dim);
        for (const double x : vec)
            if (!std::isfinite(x)) throw Error("train_skipgram: non-finite vector for token '" + vocab.words[v] + "'");
        init.vectors.emplace(vocab.words[v], std::move(vec));
    }
    return init;
}

EmbeddingTable extract_init(const InitEmbeddings& init, const InteractionStore& store, int dim,
                            std::uint64_t seed) {
    if (init.dim != 0 && init.dim != dim)
        throw Error("extract_init: init dimension " + std::to_string(init.dim) +
                    " does not match configured dimension " + std::to_string(dim));

    EmbeddingTable table(store.num_users(), store.num_tracks(), dim);
    Rng rng(mix_seed(seed, 0x65787472ULL));
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    std::size_t missing = 0;

    const auto fill_row = [&](std::span<double> row, const std::string& token) {
        const auto it = init.vectors.find(token);
        if (it == init.vectors.end()) {
            for (double& v : row) v = rng.uniform(-bound, bound);
            ++missing;
            return;
        }
        if (it->second.size() != static_cast<std::size_t>(dim))
            throw Error("extract_init: vector for '" + token + "' has dimension " +
                        std::to_string(it->second.size()));
        std::copy(it->second.begin(), it->second.end(), row.begin());
    };

    for (std::uint32_t u = 0; u < store.num_users(); ++u)
        fill_row(table.user_row(u), "user=" + store.users[u].id);
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t)
        fill_row(table.item_row(t), "song=" + store.tracks[t].id);

    if (missing > 0)
        TR_LOG_DEBUG("extract_init: %zu of %zu entities not in vocabulary, given random rows",
                     missing, store.num_users() + store.num_tracks());
    return table;
}

}  // namespace tripletrec
