#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tripletrec/embedding.hpp"
#include "tripletrec/store.hpp"

namespace tripletrec {

/// One sentence per song: the song token first, its artist, its album when
/// known, then the song's listeners. Tokens are "type=value" strings.
struct TokenSentence {
    std::vector<std::string> tokens;
};

struct InitEmbeddings {
    int dim = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;  // token -> vector
};

std::vector<TokenSentence> build_corpus(const InteractionStore& store,
                                        std::size_t max_users_per_sentence,
                                        std::uint64_t seed);

struct SkipgramConfig {
    int dim = 128;
    int window = 0;  // 0: the whole sentence is one context window
    int negatives = 5;
    int epochs = 5;
    double lr = 0.025;  // linearly decayed over all epochs
    int workers = 1;    // > 1 shards sentences with unsynchronized updates
};

/// Skip-gram with negative sampling over the token corpus. Negatives are
/// drawn from the unigram distribution raised to 3/4. Deterministic for a
/// fixed seed when workers == 1.
InitEmbeddings train_skipgram(const std::vector<TokenSentence>& corpus,
                              const SkipgramConfig& cfg,
                              std::uint64_t seed);

/// Copies user/song token vectors into an ordinal-indexed table. Entities
/// missing from the vocabulary get rows uniform in [-1/sqrt(d), +1/sqrt(d)].
EmbeddingTable extract_init(const InitEmbeddings& init,
                            const InteractionStore& store,
                            int dim,
                            std::uint64_t seed);

}  // namespace tripletrec
