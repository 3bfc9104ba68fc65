#pragma once

#include <string>
#include <vector>

#include "tripletrec/config.hpp"
#include "tripletrec/metrics.hpp"
#include "tripletrec/store.hpp"

namespace tripletrec {

struct DataPaths {
    std::string interactions;
    std::string users;
    std::string tracks;

    /// interactions.csv / users.csv / tracks.csv under one directory.
    static DataPaths in_dir(const std::string& dir);
};

InteractionStore load_store(const DataPaths& paths);

struct SynthArgs {
    PlantedConfig planted;
    std::string out_dir;
};
int cmd_synth(const SynthArgs& args);

struct InitArgs {
    RunConfig cfg;
    DataPaths data;
    std::string out_dir;
};
int cmd_init(const InitArgs& args);

struct TrainArgs {
    RunConfig cfg;
    DataPaths data;
    std::string out_dir;
    std::string init_checkpoint;  // optional: load instead of re-deriving
};
int cmd_train(const TrainArgs& args);

struct RecommendArgs {
    RunConfig cfg;
    DataPaths data;
    std::string checkpoint;
    std::string user_id;     // single-user mode, printed to stdout
    std::string users_file;  // batch mode, one user id per line
    std::string out_dir;     // batch mode output directory
};
int cmd_recommend(const RecommendArgs& args);

struct EvalArgs {
    RunConfig cfg;
    DataPaths data;
    std::string out_dir;
    std::string checkpoint_dir;  // optional: fold_<i>.txt instead of training
};

struct EvalOutcome {
    std::vector<FoldMetrics> folds;
    std::vector<double> fold_variance_agreement;  // NaN when undefined
    ConsistencyReport consistency;
};

/// Fold loop shared by eval and ablate: train (or load) per fold, build
/// per-user lists, score every metric, aggregate consistency.
EvalOutcome run_eval(const RunConfig& cfg, const InteractionStore& store,
                     const std::string& checkpoint_dir = "");

int cmd_eval(const EvalArgs& args);

struct AblateArgs {
    RunConfig cfg;
    DataPaths data;
    std::string out_dir;
};
int cmd_ablate(const AblateArgs& args);

}  // namespace tripletrec
