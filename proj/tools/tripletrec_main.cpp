// Command-line entry point: synth | init | train | recommend | eval | ablate.
// Option precedence is defaults < --config file < explicit flags; the file is
// applied in a prescan so later flags always win.
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "tripletrec/commands.hpp"
#include "tripletrec/error.hpp"
#include "tripletrec/log.hpp"

namespace {

using tripletrec::RunConfig;

std::string prescan_config_path(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

void add_data_options(CLI::App* cmd, std::string& data_dir, tripletrec::DataPaths& paths) {
    cmd->add_option("--data", data_dir, "directory holding interactions/users/tracks CSVs");
    cmd->add_option("--interactions", paths.interactions, "interactions CSV (overrides --data)");
    cmd->add_option("--users", paths.users, "users CSV (overrides --data)");
    cmd->add_option("--tracks", paths.tracks, "tracks CSV (overrides --data)");
    cmd->callback([&] {
        if (!data_dir.empty()) {
            const auto dir = tripletrec::DataPaths::in_dir(data_dir);
            if (paths.interactions.empty()) paths.interactions = dir.interactions;
            if (paths.users.empty()) paths.users = dir.users;
            if (paths.tracks.empty()) paths.tracks = dir.tracks;
        }
        if (paths.interactions.empty() || paths.users.empty() || paths.tracks.empty())
            throw CLI::ValidationError("--data (or all three CSV paths) is required");
    });
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--dim", cfg.dim, "embedding dimension");
    cmd->add_option("--lambda1", cfg.lambda1, "user-user triplet term weight");
    cmd->add_option("--lambda2", cfg.lambda2, "item-item triplet term weight");
    cmd->add_option("--margin", cfg.margin, "hinge margin");
    cmd->add_option("--lr", cfg.lr, "learning rate");
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--batch-size", cfg.batch_size, "samples per SGD step");
    cmd->add_option("--neighbors", cfg.neighbors_n, "nearest neighbors for negative mining");
    cmd->add_option("--theta-gender", cfg.theta_gender, "gender rarity emphasis");
    cmd->add_option("--theta-country", cfg.theta_country, "country rarity emphasis");
    cmd->add_option("--theta-artist", cfg.theta_artist, "artist rarity emphasis");
    cmd->add_option("--theta-song", cfg.theta_song, "song rarity emphasis");
    cmd->add_option("--theta-activity", cfg.theta_activity, "activity rarity emphasis");
    cmd->add_option("--init-window", cfg.init_window,
                    "skip-gram window (0 = whole sentence)");
    cmd->add_option("--init-negatives", cfg.init_negatives, "skip-gram negatives per pair");
    cmd->add_option("--init-epochs", cfg.init_epochs, "skip-gram epochs");
    cmd->add_option("--init-lr", cfg.init_lr, "skip-gram learning rate");
    cmd->add_option("--max-users-per-sentence", cfg.max_users_per_sentence,
                    "listener cap per song sentence");
    cmd->add_flag("--no-user-loss", cfg.no_user_loss, "drop the user-user triplet term");
    cmd->add_flag("--no-item-loss", cfg.no_item_loss, "drop the item-item triplet term");
    cmd->add_flag("--no-w2v-init", cfg.no_w2v_init, "random init instead of skip-gram");
    cmd->add_flag("--uniform-weights", cfg.uniform_weights, "disable rarity weighting");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--workers", cfg.workers, "worker threads (1 = deterministic)");
}

void add_eval_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--k", cfg.rec_k, "recommendation list length");
    cmd->add_option("--pool", cfg.candidate_pool, "stochastic sampling candidate pool");
    cmd->add_option("--folds", cfg.k_folds, "number of leave-one-out folds");
    cmd->add_option("--min-group-size", cfg.min_group_size,
                    "smallest group kept in miss-rate parity");
    cmd->add_flag("--consistency-squared", cfg.consistency_squared,
                  "penalize with variance/mean^2 instead of stddev/|mean|");
    cmd->add_flag("--stochastic-eval", cfg.stochastic_eval,
                  "evaluate sampled lists instead of deterministic top-k");
    cmd->add_flag("!--include-history", cfg.exclude_history,
                  "let training-history tracks back into recommendations");
}

}  // namespace

int main(int argc, char** argv) {
    tripletrec::log::init_from_env();

    RunConfig cfg;
    std::string config_path = prescan_config_path(argc, argv);
    try {
        if (!config_path.empty()) tripletrec::apply_config_file(cfg, config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"triplet-loss embedding recommender"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --config before or after the subcommand name
    std::string config_echo;  // value consumed by the prescan; registered for --help
    app.add_option("--config", config_echo, "key = value config file applied before flags")
        ->configurable(false);

    // synth
    tripletrec::SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a planted-structure dataset");
    synth_cmd->add_option("--groups", synth.planted.num_groups, "taste groups");
    synth_cmd->add_option("--users-per-group", synth.planted.users_per_group, "users per group");
    synth_cmd->add_option("--artists-per-group", synth.planted.artists_per_group,
                          "artists per group");
    synth_cmd->add_option("--tracks-per-artist", synth.planted.tracks_per_artist,
                          "tracks per artist");
    synth_cmd->add_option("--interactions-per-user", synth.planted.interactions_per_user,
                          "draws per user");
    synth_cmd->add_option("--crossover", synth.planted.crossover_rate,
                          "fraction of draws over the whole catalog");
    synth_cmd->add_option("--max-preferred-artists", synth.planted.max_preferred_artists,
                          "per-user taste breadth cap");
    synth_cmd->add_option("--countries", synth.planted.num_countries, "number of countries");
    synth_cmd->add_option("--max-play-count", synth.planted.max_play_count,
                          "per-interaction play count cap");
    synth_cmd->add_option("--seed", synth.planted.seed, "RNG seed");
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();

    // init
    tripletrec::InitArgs init;
    std::string init_data_dir;
    CLI::App* init_cmd = app.add_subcommand("init", "train skip-gram initial embeddings");
    add_data_options(init_cmd, init_data_dir, init.data);
    add_model_options(init_cmd, cfg);
    init_cmd->add_option("--out", init.out_dir, "output directory")->required();

    // train
    tripletrec::TrainArgs train;
    std::string train_data_dir;
    CLI::App* train_cmd = app.add_subcommand("train", "fit embeddings with the triplet loss");
    add_data_options(train_cmd, train_data_dir, train.data);
    add_model_options(train_cmd, cfg);
    train_cmd->add_option("--init", train.init_checkpoint,
                          "start from this embedding checkpoint");
    train_cmd->add_option("--out", train.out_dir, "output directory")->required();

    // recommend
    tripletrec::RecommendArgs rec;
    std::string rec_data_dir;
    CLI::App* rec_cmd = app.add_subcommand("recommend", "sample recommendation lists");
    add_data_options(rec_cmd, rec_data_dir, rec.data);
    rec_cmd->add_option("--checkpoint", rec.checkpoint, "embedding checkpoint")->required();
    rec_cmd->add_option("--user", rec.user_id, "single user id (prints to stdout)");
    rec_cmd->add_option("--users-file", rec.users_file, "file of user ids (batch mode)");
    rec_cmd->add_option("--out", rec.out_dir, "output directory (batch mode)");
    rec_cmd->add_option("--k", cfg.rec_k, "recommendations per user");
    rec_cmd->add_option("--pool", cfg.candidate_pool, "candidate pool size");
    rec_cmd->add_option("--seed", cfg.seed, "RNG seed");
    rec_cmd->add_flag("!--include-history", cfg.exclude_history,
                      "let training-history tracks back into recommendations");

    // eval
    tripletrec::EvalArgs eval;
    std::string eval_data_dir;
    CLI::App* eval_cmd = app.add_subcommand("eval", "cross-fold metric evaluation");
    add_data_options(eval_cmd, eval_data_dir, eval.data);
    add_model_options(eval_cmd, cfg);
    add_eval_options(eval_cmd, cfg);
    eval_cmd->add_option("--checkpoint-dir", eval.checkpoint_dir,
                         "load fold_<i>.txt checkpoints instead of training");
    eval_cmd->add_option("--out", eval.out_dir, "output directory")->required();

    // ablate
    tripletrec::AblateArgs ablate;
    std::string ablate_data_dir;
    CLI::App* ablate_cmd =
        app.add_subcommand("ablate", "evaluate the full model and its four ablations");
    add_data_options(ablate_cmd, ablate_data_dir, ablate.data);
    add_model_options(ablate_cmd, cfg);
    add_eval_options(ablate_cmd, cfg);
    ablate_cmd->add_option("--out", ablate.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return tripletrec::cmd_synth(synth);
        if (init_cmd->parsed()) {
            init.cfg = cfg;
            return tripletrec::cmd_init(init);
        }
        if (train_cmd->parsed()) {
            train.cfg = cfg;
            return tripletrec::cmd_train(train);
        }
        if (rec_cmd->parsed()) {
            rec.cfg = cfg;
            return tripletrec::cmd_recommend(rec);
        }
        if (eval_cmd->parsed()) {
            eval.cfg = cfg;
            return tripletrec::cmd_eval(eval);
        }
        if (ablate_cmd->parsed()) {
            ablate.cfg = cfg;
            return tripletrec::cmd_ablate(ablate);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
