// Timing harness for the parallel kernels against their serial twins.
// Parallel neighbor search and top-k scoring must match the serial output
// bit for bit; Hogwild training only has to reach a comparable loss.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tripletrec/init.hpp"
#include "tripletrec/recommender.hpp"
#include "tripletrec/sampler.hpp"
#include "tripletrec/store.hpp"
#include "tripletrec/trainer.hpp"
#include "tripletrec/weighting.hpp"

using namespace tripletrec;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void print_row(const char* kernel, double serial_ms, double parallel_ms, const char* match) {
    std::printf("%-28s %12.1f %12.1f %9.2fx %8s\n", kernel, serial_ms, parallel_ms,
                serial_ms / parallel_ms, match);
}

}  // namespace

int main(int argc, char** argv) {
    int workers = 4;
#ifdef _OPENMP
    workers = omp_get_max_threads();
#endif
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--workers" && i + 1 < argc) workers = std::atoi(argv[++i]);
    }

    PlantedConfig planted;
    planted.num_groups = 4;
    planted.users_per_group = 100;
    planted.artists_per_group = 20;
    planted.tracks_per_artist = 15;
    planted.interactions_per_user = 30;
    planted.seed = 7;
    const InteractionStore store = generate_planted(planted);
    std::printf("store: %zu users, %zu tracks, %zu interactions; workers=%d\n\n",
                store.num_users(), store.num_tracks(), store.interactions.size(), workers);
    std::printf("%-28s %12s %12s %10s %8s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "match");

    const int dim = 64;
    const EmbeddingTable table =
        EmbeddingTable::random(store.num_users(), store.num_tracks(), dim, 3);

    {  // exact top-N neighbor search; includes the naive oracle for reference
        auto t0 = Clock::now();
        const NeighborIndex naive = reference::build_neighbor_index(table, 10);
        const double naive_ms = ms_since(t0);

        t0 = Clock::now();
        const NeighborIndex serial = build_neighbor_index(table, 10, 1);
        const double serial_ms = ms_since(t0);

        t0 = Clock::now();
        const NeighborIndex parallel = build_neighbor_index(table, 10, workers);
        const double parallel_ms = ms_since(t0);

        const bool ok = serial.flat == parallel.flat && serial.flat == naive.flat;
        std::printf("%-28s %12.1f %12s %10s %8s\n", "neighbor index (naive)", naive_ms, "-", "-",
                    "-");
        print_row("neighbor index (blocked)", serial_ms, parallel_ms, ok ? "yes" : "NO");
    }

    {  // deterministic per-user top-k scoring
        std::vector<std::uint32_t> users(store.num_users());
        for (std::uint32_t u = 0; u < store.num_users(); ++u) users[u] = u;

        auto t0 = Clock::now();
        const auto serial = top_k_for_users(table, store, users, 100, true, 1);
        const double serial_ms = ms_since(t0);

        t0 = Clock::now();
        const auto parallel = top_k_for_users(table, store, users, 100, true, workers);
        const double parallel_ms = ms_since(t0);

        bool ok = serial.size() == parallel.size();
        for (std::size_t i = 0; ok && i < serial.size(); ++i)
            ok = serial[i].tracks == parallel[i].tracks;
        print_row("top-k scoring", serial_ms, parallel_ms, ok ? "yes" : "NO");
    }

    {  // one training epoch: batch SGD vs unsynchronized per-sample updates
        const WeightModel weights = fit_weight_model(store, ThetaWeights{});
        TrainConfig cfg;
        cfg.dim = dim;
        cfg.epochs = 1;
        cfg.batch_size = 256;

        std::vector<EpochStats> trace_serial, trace_parallel;
        auto t0 = Clock::now();
        cfg.workers = 1;
        train(store, table, &weights, cfg, 11, &trace_serial);
        const double serial_ms = ms_since(t0);

        t0 = Clock::now();
        cfg.workers = workers;
        train(store, table, &weights, cfg, 11, &trace_parallel);
        const double parallel_ms = ms_since(t0);

        print_row("triplet SGD epoch", serial_ms, parallel_ms, "racy");
        std::printf("%-28s serial loss %.4f, hogwild loss %.4f\n", "",
                    trace_serial.back().mean_total, trace_parallel.back().mean_total);
    }

    {  // skip-gram initialization epoch
        const auto corpus = build_corpus(store, 256, 5);
        SkipgramConfig cfg;
        cfg.dim = dim;
        cfg.epochs = 1;

        auto t0 = Clock::now();
        cfg.workers = 1;
        train_skipgram(corpus, cfg, 17);
        const double serial_ms = ms_since(t0);

        t0 = Clock::now();
        cfg.workers = workers;
        train_skipgram(corpus, cfg, 17);
        const double parallel_ms = ms_since(t0);

        print_row("skip-gram epoch", serial_ms, parallel_ms, "racy");
    }

    return 0;
}
