#pragma once

#include <cstdint>
#include <string>

#include "tripletrec/init.hpp"
#include "tripletrec/trainer.hpp"
#include "tripletrec/weighting.hpp"

namespace tripletrec {

/// Every tunable in one flat struct. Defaults here, overridden by a
/// key = value config file, overridden by CLI flags. The resolved result is
/// echoed into the run directory so any experiment can be replayed from its
/// output alone.
struct RunConfig {
    // model
    int dim = 128;
    double lambda1 = 2.5;
    double lambda2 = 2.5;
    double margin = 0.25;
    double lr = 0.05;
    int epochs = 10;
    std::size_t batch_size = 256;
    int neighbors_n = 10;

    // rarity weighting
    double theta_gender = 5.0;
    double theta_country = 100.0;
    double theta_artist = 1e4;
    double theta_song = 1e5;
    double theta_activity = 1e4;

    // initialization
    int init_window = 0;
    int init_negatives = 5;
    int init_epochs = 5;
    double init_lr = 0.025;
    std::size_t max_users_per_sentence = 256;

    // recommendation / evaluation
    std::size_t rec_k = 100;
    std::size_t candidate_pool = 1000;
    bool exclude_history = true;
    int k_folds = 4;
    std::size_t min_group_size = 10;
    bool consistency_squared = false;
    bool stochastic_eval = false;  // evaluate sampled lists instead of top-k

    // ablation switches
    bool no_user_loss = false;
    bool no_item_loss = false;
    bool no_w2v_init = false;
    bool uniform_weights = false;

    std::uint64_t seed = 42;
    int workers = 1;

    ThetaWeights theta() const;
    TrainConfig train_config() const;
    SkipgramConfig skipgram_config() const;
};

/// Applies `key = value` lines over `cfg`. Blank lines and #-comments are
/// skipped; an unknown key or unparsable value is an error naming the line.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Writes every key in config-file syntax, preceded by "command = <name>".
void save_resolved_config(const RunConfig& cfg, const std::string& command,
                          const std::string& path);

}  // namespace tripletrec
