#include "tripletrec/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "tripletrec/error.hpp"
#include "tripletrec/init.hpp"
#include "tripletrec/log.hpp"
#include "tripletrec/recommender.hpp"
#include "tripletrec/rng.hpp"
#include "tripletrec/sampler.hpp"
#include "tripletrec/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tripletrec {

DataPaths DataPaths::in_dir(const std::string& dir) {
    return {dir + "/interactions.csv", dir + "/users.csv", dir + "/tracks.csv"};
}

InteractionStore load_store(const DataPaths& paths) {
    return load_store(paths.interactions, paths.users, paths.tracks);
}

namespace {

void ensure_dir(const std::string& dir) {
    if (dir.empty()) throw Error("output directory not set (--out)");
    fs::create_directories(dir);
}

/// Per-fold embedding table: skip-gram init then SGD, unless a checkpoint
/// directory supplies fold_<i>.txt directly.
EmbeddingTable fold_table(const RunConfig& cfg, const FoldSplit& fold,
                          const std::string& checkpoint_dir) {
    if (!checkpoint_dir.empty()) {
        const std::string path =
            checkpoint_dir + "/fold_" + std::to_string(fold.fold_id) + ".txt";
        EmbeddingTable table = load_table(path, fold.train);
        if (table.dim != cfg.dim)
            throw Error("checkpoint '" + path + "' has dimension " + std::to_string(table.dim) +
                        ", config says " + std::to_string(cfg.dim));
        return table;
    }

    const std::uint64_t fold_seed = mix_seed(cfg.seed, 0xf01d0000ULL + fold.fold_id);
    EmbeddingTable init_table =
        cfg.no_w2v_init
            ? EmbeddingTable::random(fold.train.num_users(), fold.train.num_tracks(), cfg.dim,
                                     fold_seed)
            : [&] {
                  const auto corpus =
                      build_corpus(fold.train, cfg.max_users_per_sentence, fold_seed);
                  const InitEmbeddings sg =
                      train_skipgram(corpus, cfg.skipgram_config(), fold_seed);
                  return extract_init(sg, fold.train, cfg.dim, fold_seed);
              }();

    const WeightModel weights =
        cfg.uniform_weights ? WeightModel{} : fit_weight_model(fold.train, cfg.theta());
    return train(fold.train, std::move(init_table), cfg.uniform_weights ? nullptr : &weights,
                 cfg.train_config(), fold_seed);
}

std::vector<RecommendationList> fold_lists(const RunConfig& cfg, const FoldSplit& fold,
                                           const EmbeddingTable& table) {
    std::vector<std::uint32_t> users;
    users.reserve(fold.heldout.size());
    for (const auto& [user, track] : fold.heldout) users.push_back(user);

    if (!cfg.stochastic_eval)
        return top_k_for_users(table, fold.train, users, cfg.rec_k, cfg.exclude_history,
                               cfg.workers);

    const std::uint64_t fold_seed = mix_seed(cfg.seed, 0x73616d70ULL + fold.fold_id);
    std::vector<RecommendationList> lists;
    lists.reserve(users.size());
    for (const std::uint32_t u : users) {
        Rng rng(mix_seed(fold_seed, u));
        lists.push_back(recommend(table, fold.train, u, cfg.rec_k, cfg.candidate_pool,
                                  cfg.exclude_history, rng));
    }
    return lists;
}

}  // namespace

EvalOutcome run_eval(const RunConfig& cfg, const InteractionStore& store,
                     const std::string& checkpoint_dir) {
    if (cfg.k_folds < 2) throw Error("eval: k_folds must be >= 2 for consistency");

    const std::vector<FoldSplit> folds = make_folds(store, cfg.k_folds, cfg.seed);
    EvalOutcome outcome;

    for (const FoldSplit& fold : folds) {
        const EmbeddingTable table = fold_table(cfg, fold, checkpoint_dir);
        const std::vector<RecommendationList> lists = fold_lists(cfg, fold, table);

        FoldMetrics m;
        m.fold_id = fold.fold_id;
        m.hit_rate = hit_rate_at_k(lists, fold.heldout, cfg.rec_k);
        m.mrr = mrr(lists, fold.heldout);
        const Partition partitions[] = {
            partition_by_gender(fold.train, fold.heldout),
            partition_by_country(fold.train, fold.heldout),
            partition_by_activity_decile(fold.train, fold.heldout),
            partition_by_track_pop_decile(fold.train, fold.heldout),
            partition_by_artist_pop_decile(fold.train, fold.heldout),
        };
        for (const Partition& p : partitions) {
            const MredResult r = mred(lists, fold.heldout, p, cfg.rec_k, cfg.min_group_size);
            m.mred.emplace(p.name, r.value);
            m.mred_groups.emplace(p.name, r.groups);
        }
        outcome.folds.push_back(std::move(m));

        const std::optional<double> agreement = variance_agreement(fold.train, lists);
        outcome.fold_variance_agreement.push_back(
            agreement ? *agreement : std::numeric_limits<double>::quiet_NaN());

        TR_LOG_INFO("fold %d: hit_rate %.4f, mrr %.4f", fold.fold_id,
                    outcome.folds.back().hit_rate, outcome.folds.back().mrr);
    }

    outcome.consistency = consistency(outcome.folds, cfg.consistency_squared);
    return outcome;
}

namespace {

json outcome_to_json(const EvalOutcome& outcome) {
    json folds = json::array();
    for (std::size_t i = 0; i < outcome.folds.size(); ++i) {
        const FoldMetrics& m = outcome.folds[i];
        json groups;
        for (const auto& [partition, by_group] : m.mred_groups) {
            json g;
            for (const auto& [name, rate] : by_group)
                g[name] = {{"size", rate.size}, {"miss_rate", rate.miss_rate}};
            groups[partition] = std::move(g);
        }
        const double agreement = outcome.fold_variance_agreement[i];
        folds.push_back({{"fold_id", m.fold_id},
                         {"hit_rate", m.hit_rate},
                         {"mrr", m.mrr},
                         {"mred", m.mred},
                         {"mred_groups", std::move(groups)},
                         {"variance_agreement",
                          std::isnan(agreement) ? json(nullptr) : json(agreement)}});
    }
    return {{"folds", std::move(folds)},
            {"consistency",
             {{"per_metric", outcome.consistency.per_metric},
              {"undefined", outcome.consistency.undefined},
              {"overall", outcome.consistency.overall},
              {"folds", outcome.consistency.folds},
              {"squared", outcome.consistency.squared}}}};
}

std::vector<std::string> mred_columns(const EvalOutcome& outcome) {
    std::vector<std::string> names;
    for (const auto& [name, value] : outcome.folds.front().mred) names.push_back(name);
    return names;
}

void write_eval_csv(const EvalOutcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    const std::vector<std::string> mreds = mred_columns(outcome);
    out << "fold_id,hit_rate,mrr";
    for (const std::string& name : mreds) out << ",mred_" << name;
    out << ",variance_agreement\n";
    out.precision(17);
    for (std::size_t i = 0; i < outcome.folds.size(); ++i) {
        const FoldMetrics& m = outcome.folds[i];
        out << m.fold_id << ',' << m.hit_rate << ',' << m.mrr;
        for (const std::string& name : mreds) out << ',' << m.mred.at(name);
        const double agreement = outcome.fold_variance_agreement[i];
        if (std::isnan(agreement))
            out << ",\n";
        else
            out << ',' << agreement << '\n';
    }
}

double mean_defined(const std::vector<double>& values) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const double v : values)
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

/// Fold means per metric plus aggregate agreement/consistency — one ablation row.
struct SummaryRow {
    std::string variant;
    double hit_rate = 0.0;
    double mrr = 0.0;
    std::map<std::string, double> mred;
    double variance_agreement = 0.0;  // NaN when undefined on every fold
    double consistency_overall = 0.0;
};

SummaryRow summarize(const std::string& variant, const EvalOutcome& outcome) {
    SummaryRow row;
    row.variant = variant;
    const double n = static_cast<double>(outcome.folds.size());
    for (const FoldMetrics& m : outcome.folds) {
        row.hit_rate += m.hit_rate / n;
        row.mrr += m.mrr / n;
        for (const auto& [name, value] : m.mred) row.mred[name] += value / n;
    }
    row.variance_agreement = mean_defined(outcome.fold_variance_agreement);
    row.consistency_overall = outcome.consistency.overall;
    return row;
}

}  // namespace

int cmd_synth(const SynthArgs& args) {
    ensure_dir(args.out_dir);
    const InteractionStore store = generate_planted(args.planted);
    write_store(store, args.out_dir);

    std::ofstream cfg(args.out_dir + "/synth_config.txt");
    cfg << "num_groups = " << args.planted.num_groups << "\n"
        << "users_per_group = " << args.planted.users_per_group << "\n"
        << "artists_per_group = " << args.planted.artists_per_group << "\n"
        << "tracks_per_artist = " << args.planted.tracks_per_artist << "\n"
        << "interactions_per_user = " << args.planted.interactions_per_user << "\n"
        << "crossover_rate = " << args.planted.crossover_rate << "\n"
        << "max_preferred_artists = " << args.planted.max_preferred_artists << "\n"
        << "num_countries = " << args.planted.num_countries << "\n"
        << "country_decay = " << args.planted.country_decay << "\n"
        << "max_play_count = " << args.planted.max_play_count << "\n"
        << "seed = " << args.planted.seed << "\n";

    std::printf("wrote %zu users, %zu tracks, %zu interactions to %s\n", store.num_users(),
                store.num_tracks(), store.interactions.size(), args.out_dir.c_str());
    return 0;
}

int cmd_init(const InitArgs& args) {
    ensure_dir(args.out_dir);
    const InteractionStore store = load_store(args.data);
    const RunConfig& cfg = args.cfg;

    const auto corpus = build_corpus(store, cfg.max_users_per_sentence, cfg.seed);
    const InitEmbeddings sg = train_skipgram(corpus, cfg.skipgram_config(), cfg.seed);
    const EmbeddingTable table = extract_init(sg, store, cfg.dim, cfg.seed);

    save_table(table, store, args.out_dir + "/init.txt");
    save_resolved_config(cfg, "init", args.out_dir + "/config.txt");
    std::printf("wrote initialization for %zu users and %zu tracks to %s/init.txt\n",
                store.num_users(), store.num_tracks(), args.out_dir.c_str());
    return 0;
}

int cmd_train(const TrainArgs& args) {
    ensure_dir(args.out_dir);
    const InteractionStore store = load_store(args.data);
    const RunConfig& cfg = args.cfg;

    EmbeddingTable init_table = [&] {
        if (!args.init_checkpoint.empty()) return load_table(args.init_checkpoint, store);
        if (cfg.no_w2v_init)
            return EmbeddingTable::random(store.num_users(), store.num_tracks(), cfg.dim,
                                          cfg.seed);
        const auto corpus = build_corpus(store, cfg.max_users_per_sentence, cfg.seed);
        const InitEmbeddings sg = train_skipgram(corpus, cfg.skipgram_config(), cfg.seed);
        return extract_init(sg, store, cfg.dim, cfg.seed);
    }();

    const WeightModel weights =
        cfg.uniform_weights ? WeightModel{} : fit_weight_model(store, cfg.theta());
    std::vector<EpochStats> trace;
    const EmbeddingTable table =
        train(store, std::move(init_table), cfg.uniform_weights ? nullptr : &weights,
              cfg.train_config(), cfg.seed, &trace);

    save_table(table, store, args.out_dir + "/checkpoint.txt");
    {
        std::ofstream out(args.out_dir + "/loss_trace.csv");
        if (!out) throw Error("cannot write loss trace");
        out << "epoch,mean_total,mean_user_item,mean_user_user,mean_item_item,active_fraction,"
               "samples\n";
        out.precision(17);
        for (const EpochStats& e : trace)
            out << e.epoch << ',' << e.mean_total << ',' << e.mean_user_item << ','
                << e.mean_user_user << ',' << e.mean_item_item << ',' << e.active_fraction << ','
                << e.samples << '\n';
    }
    save_resolved_config(cfg, "train", args.out_dir + "/config.txt");
    std::printf("wrote checkpoint and loss trace for %d epochs to %s\n", cfg.epochs,
                args.out_dir.c_str());
    return 0;
}

int cmd_recommend(const RecommendArgs& args) {
    const InteractionStore store = load_store(args.data);
    const RunConfig& cfg = args.cfg;
    if (args.checkpoint.empty()) throw Error("recommend: --checkpoint is required");
    const EmbeddingTable table = load_table(args.checkpoint, store);

    const auto ordinal_of = [&](const std::string& id) {
        const auto it = store.user_ordinal.find(id);
        if (it == store.user_ordinal.end()) throw Error("unknown user id '" + id + "'");
        return it->second;
    };
    const auto distance_to = [&](std::uint32_t user, std::uint32_t track) {
        return cosine_distance(table.user_row(user), table.item_row(track));
    };

    if (!args.user_id.empty()) {
        const std::uint32_t user = ordinal_of(args.user_id);
        Rng rng(mix_seed(cfg.seed, 0x726563ULL));
        const RecommendationList list = recommend(table, store, user, cfg.rec_k,
                                                  cfg.candidate_pool, cfg.exclude_history, rng);
        for (const std::uint32_t t : list.tracks)
            std::printf("%s %.6f\n", store.tracks[t].id.c_str(), distance_to(user, t));
        return 0;
    }

    if (args.users_file.empty())
        throw Error("recommend: pass --user <id> or --users-file <path>");
    ensure_dir(args.out_dir);

    std::ifstream in(args.users_file);
    if (!in) throw Error("cannot open users file '" + args.users_file + "'");
    std::ofstream out(args.out_dir + "/recommendations.csv");
    if (!out) throw Error("cannot write recommendations.csv");
    out << "user_id,rank,track_id,distance\n";
    out.precision(17);

    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const std::uint32_t user = ordinal_of(line);
        Rng rng(mix_seed(cfg.seed, 0x72656300ULL + user));
        const RecommendationList list = recommend(table, store, user, cfg.rec_k,
                                                  cfg.candidate_pool, cfg.exclude_history, rng);
        for (std::size_t i = 0; i < list.tracks.size(); ++i)
            out << line << ',' << i + 1 << ',' << store.tracks[list.tracks[i]].id << ','
                << distance_to(user, list.tracks[i]) << '\n';
    }
    save_resolved_config(cfg, "recommend", args.out_dir + "/config.txt");
    return 0;
}

int cmd_eval(const EvalArgs& args) {
    ensure_dir(args.out_dir);
    const InteractionStore store = load_store(args.data);
    const EvalOutcome outcome = run_eval(args.cfg, store, args.checkpoint_dir);

    {
        std::ofstream out(args.out_dir + "/report.json");
        if (!out) throw Error("cannot write report.json");
        out << outcome_to_json(outcome).dump(2) << "\n";
    }
    write_eval_csv(outcome, args.out_dir + "/report.csv");
    save_resolved_config(args.cfg, "eval", args.out_dir + "/config.txt");

    std::printf("folds %d: overall consistency %.6f\n", outcome.consistency.folds,
                outcome.consistency.overall);
    for (const FoldMetrics& m : outcome.folds)
        std::printf("  fold %d: hit_rate %.6f mrr %.6f\n", m.fold_id, m.hit_rate, m.mrr);
    return 0;
}

int cmd_ablate(const AblateArgs& args) {
    ensure_dir(args.out_dir);
    const InteractionStore store = load_store(args.data);

    // full model plus one switch flipped at a time
    std::vector<std::pair<std::string, RunConfig>> variants;
    variants.emplace_back("full", args.cfg);
    {
        RunConfig c = args.cfg;
        c.no_user_loss = true;
        variants.emplace_back("no_user_user_loss", c);
    }
    {
        RunConfig c = args.cfg;
        c.no_item_loss = true;
        variants.emplace_back("no_item_item_loss", c);
    }
    {
        RunConfig c = args.cfg;
        c.no_w2v_init = true;
        variants.emplace_back("no_w2v_init", c);
    }
    {
        RunConfig c = args.cfg;
        c.uniform_weights = true;
        variants.emplace_back("no_weighting", c);
    }

    std::vector<SummaryRow> rows;
    json detail = json::object();
    for (const auto& [name, cfg] : variants) {
        TR_LOG_INFO("ablation variant '%s'", name.c_str());
        const EvalOutcome outcome = run_eval(cfg, store);
        rows.push_back(summarize(name, outcome));
        detail[name] = outcome_to_json(outcome);
    }

    const std::vector<std::string> mreds = [&] {
        std::vector<std::string> names;
        for (const auto& [name, value] : rows.front().mred) names.push_back(name);
        return names;
    }();

    {
        std::ofstream out(args.out_dir + "/ablation.csv");
        if (!out) throw Error("cannot write ablation.csv");
        out << "variant,hit_rate,mrr";
        for (const std::string& name : mreds) out << ",mred_" << name;
        out << ",variance_agreement,consistency_overall\n";
        out.precision(17);
        for (const SummaryRow& r : rows) {
            out << r.variant << ',' << r.hit_rate << ',' << r.mrr;
            for (const std::string& name : mreds) out << ',' << r.mred.at(name);
            out << ',';
            if (!std::isnan(r.variance_agreement)) out << r.variance_agreement;
            out << ',' << r.consistency_overall << '\n';
        }
    }
    {
        std::ofstream out(args.out_dir + "/ablation.json");
        if (!out) throw Error("cannot write ablation.json");
        out << detail.dump(2) << "\n";
    }
    save_resolved_config(args.cfg, "ablate", args.out_dir + "/config.txt");

    std::printf("%-20s %10s %10s %12s\n", "variant", "hit_rate", "mrr", "consistency");
    for (const SummaryRow& r : rows)
        std::printf("%-20s %10.6f %10.6f %12.6f\n", r.variant.c_str(), r.hit_rate, r.mrr,
                    r.consistency_overall);
    return 0;
}

}  // namespace tripletrec
