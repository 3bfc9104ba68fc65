#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "tripletrec/commands.hpp"
#include "tripletrec/embedding.hpp"
#include "tripletrec/store.hpp"

using namespace tripletrec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = TRIPLETREC_BIN;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& stem)
        : path(fs::path("/tmp") /
               ("tripletrec_cli_" + stem + "_" + std::to_string(getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = kBin + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::string run_capture(const std::string& args, int* exit_code = nullptr) {
    const std::string out_file =
        "/tmp/tripletrec_cli_capture_" + std::to_string(getpid()) + ".txt";
    const std::string cmd = kBin + " " + args + " > " + out_file + " 2>&1";
    const int code = std::system(cmd.c_str());
    if (exit_code) *exit_code = code;
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    std::remove(out_file.c_str());
    return buf.str();
}

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

void synth_small(const std::string& out, const std::string& extra = "") {
    REQUIRE(run("synth --groups 2 --users-per-group 20 --artists-per-group 4"
                " --tracks-per-artist 5 --interactions-per-user 10 --seed 3 --out " +
                out + " " + extra) == 0);
}

// Store where user u's history is exactly two tracks by artist a<u>, plus a
// checkpoint whose user vector equals both of their track vectors. Whatever
// leave-one-out fold is drawn, the held-out sibling track sits at distance
// zero and ranks first, and every evaluation partition collapses to a single
// group, so every fold reports identical metrics.
void write_pinned_fixture(const std::string& data_dir, const std::string& ckpt_dir,
                          int n_users, int folds) {
    InteractionStore store;
    for (int u = 0; u < n_users; ++u)
        store.users.push_back({"u" + std::to_string(u), Gender::male, "XX", 0});
    for (int u = 0; u < n_users; ++u)
        for (int j = 0; j < 2; ++j)
            store.tracks.push_back(
                {"t" + std::to_string(2 * u + j), "a" + std::to_string(u), ""});
    for (int u = 0; u < n_users; ++u)
        for (int j = 0; j < 2; ++j)
            store.interactions.push_back({static_cast<std::uint32_t>(u),
                                          static_cast<std::uint32_t>(2 * u + j), 1});
    finalize_store(store);
    write_store(store, data_dir);

    EmbeddingTable table(store.num_users(), store.num_tracks(), 2);
    for (int u = 0; u < n_users; ++u) {
        const double angle = 0.3 + 2.9 * u / n_users;  // distinct directions
        const double x = std::cos(angle), y = std::sin(angle);
        table.user_row(u)[0] = x;
        table.user_row(u)[1] = y;
        for (int j = 0; j < 2; ++j) {
            table.item_row(2 * u + j)[0] = x;
            table.item_row(2 * u + j)[1] = y;
        }
    }
    fs::create_directories(ckpt_dir);
    for (int f = 0; f < folds; ++f)
        save_table(table, store, ckpt_dir + "/fold_" + std::to_string(f) + ".txt");
}

}  // namespace

TEST_CASE("synth writes the three CSVs with the requested shape") {
    TempDir dir("synth");
    REQUIRE(run("synth --groups 4 --users-per-group 125 --seed 1 --out " + dir.sub("data")) ==
            0);
    CHECK(fs::exists(dir.sub("data") + "/users.csv"));
    CHECK(fs::exists(dir.sub("data") + "/tracks.csv"));
    CHECK(fs::exists(dir.sub("data") + "/interactions.csv"));
    CHECK(line_count(dir.sub("data") + "/users.csv") == 501);  // header + 500

    const InteractionStore store = load_store(DataPaths::in_dir(dir.sub("data")));
    CHECK(store.num_users() == 500);
    CHECK(store.interactions.size() > 1000);
}

TEST_CASE("a missing output directory is created on demand") {
    TempDir dir("mkout");
    const std::string nested = dir.sub("a/b/c");
    REQUIRE(run("synth --groups 2 --users-per-group 5 --out " + nested) == 0);
    CHECK(fs::exists(nested + "/users.csv"));
}

TEST_CASE("bad invocations exit nonzero with usage text") {
    int code = 0;
    const std::string out = run_capture("synth --users-per-group many --out /tmp/x", &code);
    CHECK(code != 0);
    CHECK(out.find("--users-per-group") != std::string::npos);

    CHECK(run("synth") != 0);              // missing required --out
    CHECK(run("definitely-not-a-command") != 0);
    CHECK(run("train --no-such-flag") != 0);

    int help_code = 1;
    const std::string help = run_capture("--help", &help_code);
    CHECK(help_code == 0);
    CHECK(help.find("synth") != std::string::npos);
    CHECK(help.find("eval") != std::string::npos);
}

TEST_CASE("train writes a loadable checkpoint and a loss trace") {
    TempDir dir("train");
    synth_small(dir.sub("data"));
    REQUIRE(run("train --data " + dir.sub("data") +
                " --dim 16 --epochs 3 --batch-size 64 --neighbors 4 --init-epochs 2"
                " --seed 7 --out " +
                dir.sub("run")) == 0);

    const InteractionStore store = load_store(DataPaths::in_dir(dir.sub("data")));
    const EmbeddingTable table = load_table(dir.sub("run") + "/checkpoint.txt", store);
    CHECK(table.dim == 16);

    std::ifstream trace(dir.sub("run") + "/loss_trace.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header ==
          "epoch,mean_total,mean_user_item,mean_user_user,mean_item_item,active_fraction,"
          "samples");
    CHECK(line_count(dir.sub("run") + "/loss_trace.csv") == 4);  // header + 3 epochs
    CHECK(fs::exists(dir.sub("run") + "/config.txt"));
}

TEST_CASE("zero-epoch training returns the initialization unchanged") {
    TempDir dir("epoch0");
    synth_small(dir.sub("data"));
    REQUIRE(run("init --data " + dir.sub("data") +
                " --dim 12 --init-epochs 2 --seed 9 --out " + dir.sub("init")) == 0);
    REQUIRE(run("train --data " + dir.sub("data") + " --init " + dir.sub("init") +
                "/init.txt --dim 12 --epochs 0 --seed 9 --out " + dir.sub("run")) == 0);

    const InteractionStore store = load_store(DataPaths::in_dir(dir.sub("data")));
    const EmbeddingTable init = load_table(dir.sub("init") + "/init.txt", store);
    const EmbeddingTable out = load_table(dir.sub("run") + "/checkpoint.txt", store);
    CHECK(tables_equal(init, out));
}

TEST_CASE("ablation flags zero their loss columns") {
    TempDir dir("ablate_cols");
    synth_small(dir.sub("data"));
    REQUIRE(run("train --data " + dir.sub("data") +
                " --dim 8 --epochs 2 --batch-size 64 --no-w2v-init --no-user-loss"
                " --seed 3 --out " +
                dir.sub("nouser")) == 0);

    std::ifstream trace(dir.sub("nouser") + "/loss_trace.csv");
    std::string line;
    std::getline(trace, line);  // header
    int rows = 0;
    while (std::getline(trace, line)) {
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 7);
        CHECK(std::stod(fields[3]) == 0.0);  // mean_user_user
        CHECK(std::stod(fields[4]) > 0.0);   // item term still alive
        ++rows;
    }
    CHECK(rows == 2);
}

TEST_CASE("the echoed config replays to an identical checkpoint") {
    TempDir dir("replay");
    synth_small(dir.sub("data"));
    REQUIRE(run("train --data " + dir.sub("data") +
                " --dim 8 --epochs 2 --batch-size 32 --lambda1 0.7 --margin 0.3"
                " --init-epochs 2 --seed 21 --out " +
                dir.sub("first")) == 0);
    REQUIRE(run("train --data " + dir.sub("data") + " --config " + dir.sub("first") +
                "/config.txt --out " + dir.sub("second")) == 0);

    const InteractionStore store = load_store(DataPaths::in_dir(dir.sub("data")));
    const EmbeddingTable a = load_table(dir.sub("first") + "/checkpoint.txt", store);
    const EmbeddingTable b = load_table(dir.sub("second") + "/checkpoint.txt", store);
    CHECK(tables_equal(a, b));
}

TEST_CASE("recommend prints k scored lines or writes the batch CSV") {
    TempDir dir("rec");
    synth_small(dir.sub("data"));
    REQUIRE(run("train --data " + dir.sub("data") +
                " --dim 8 --epochs 2 --no-w2v-init --seed 5 --out " + dir.sub("run")) == 0);

    int code = 1;
    const std::string out =
        run_capture("recommend --data " + dir.sub("data") + " --checkpoint " + dir.sub("run") +
                        "/checkpoint.txt --user u000003 --k 5 --pool 20 --seed 2",
                    &code);
    REQUIRE(code == 0);
    std::stringstream lines(out);
    std::string line;
    int scored = 0;
    const InteractionStore store = load_store(DataPaths::in_dir(dir.sub("data")));
    while (std::getline(lines, line)) {
        if (line.empty() || line.rfind("[info]", 0) == 0) continue;
        std::stringstream ss(line);
        std::string track;
        double distance = -1.0;
        ss >> track >> distance;
        CHECK(store.track_ordinal.count(track) == 1);
        CHECK(distance >= -1e-12);
        ++scored;
    }
    CHECK(scored == 5);

    std::ofstream users_file(dir.sub("users.txt"));
    users_file << "u000001\nu000004\nu000007\n";
    users_file.close();
    REQUIRE(run("recommend --data " + dir.sub("data") + " --checkpoint " + dir.sub("run") +
                "/checkpoint.txt --users-file " + dir.sub("users.txt") +
                " --k 4 --pool 20 --seed 2 --out " + dir.sub("batch")) == 0);
    std::ifstream csv(dir.sub("batch") + "/recommendations.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "user_id,rank,track_id,distance");
    CHECK(line_count(dir.sub("batch") + "/recommendations.csv") == 1 + 3 * 4);
}

TEST_CASE("eval emits a full report with the requested fold count") {
    TempDir dir("eval");
    synth_small(dir.sub("data"));
    REQUIRE(run("eval --data " + dir.sub("data") +
                " --dim 8 --epochs 2 --init-epochs 2 --folds 4 --k 10 --pool 40"
                " --min-group-size 5 --seed 13 --out " +
                dir.sub("report")) == 0);

    std::ifstream in(dir.sub("report") + "/report.json");
    REQUIRE(in.good());
    const json report = json::parse(in);
    REQUIRE(report.contains("folds"));
    REQUIRE(report["folds"].size() == 4);
    for (const json& fold : report["folds"]) {
        CHECK(fold["hit_rate"].is_number());
        CHECK(fold["hit_rate"].get<double>() >= 0.0);
        CHECK(fold["hit_rate"].get<double>() <= 1.0);
        CHECK(fold["mrr"].is_number());
        REQUIRE(fold.contains("mred"));
        for (const std::string part :
             {"gender", "country", "activity", "track_pop", "artist_pop"})
            CHECK(fold["mred"].contains(part));
        for (const auto& [name, value] : fold["mred"].items())
            if (value.is_number()) CHECK(value.get<double>() <= 1e-12);
    }
    REQUIRE(report.contains("consistency"));
    CHECK(report["consistency"]["folds"] == 4);
    CHECK(report["consistency"].contains("overall"));
    CHECK(report["consistency"].contains("per_metric"));

    CHECK(fs::exists(dir.sub("report") + "/report.csv"));
    CHECK(fs::exists(dir.sub("report") + "/config.txt"));
    CHECK(line_count(dir.sub("report") + "/report.csv") >= 5);
}

TEST_CASE("identical fold metrics produce overall consistency of exactly one") {
    TempDir dir("pinned");
    write_pinned_fixture(dir.sub("data"), dir.sub("ckpt"), 12, 3);
    REQUIRE(run("eval --data " + dir.sub("data") + " --checkpoint-dir " + dir.sub("ckpt") +
                " --dim 2 --folds 3 --k 5 --pool 10 --min-group-size 10 --seed 5 --out " +
                dir.sub("report")) == 0);

    std::ifstream in(dir.sub("report") + "/report.json");
    REQUIRE(in.good());
    const json report = json::parse(in);
    REQUIRE(report["folds"].size() == 3);
    for (const json& fold : report["folds"]) {
        CHECK(fold["hit_rate"].get<double>() == 1.0);
        CHECK(fold["mrr"].get<double>() == 1.0);
        for (const auto& [name, value] : fold["mred"].items())
            CHECK(value.get<double>() == 0.0);
        CHECK(fold["variance_agreement"].is_null());  // zero marginal variance
    }
    CHECK(report["consistency"]["overall"].get<double>() == 1.0);
}

TEST_CASE("the ablation sweep reports five variants reproducibly") {
    TempDir dir("ablate");
    synth_small(dir.sub("data"));
    const std::string flags = " --dim 8 --epochs 2 --init-epochs 2 --folds 2 --k 10"
                              " --pool 40 --min-group-size 5 --seed 17 --out ";
    REQUIRE(run("ablate --data " + dir.sub("data") + flags + dir.sub("one")) == 0);
    REQUIRE(run("ablate --data " + dir.sub("data") + flags + dir.sub("two")) == 0);

    std::ifstream csv(dir.sub("one") + "/ablation.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("variant,", 0) == 0);
    std::vector<std::string> variants;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) variants.push_back(line.substr(0, line.find(',')));
    const std::vector<std::string> expected = {"full", "no_user_user_loss", "no_item_item_loss",
                                               "no_w2v_init", "no_weighting"};
    CHECK(variants == expected);

    std::ifstream a(dir.sub("one") + "/ablation.csv"), b(dir.sub("two") + "/ablation.csv");
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    std::ifstream js(dir.sub("one") + "/ablation.json");
    const json all = json::parse(js);
    for (const std::string& v : expected) REQUIRE(all.contains(v));
    CHECK(all["full"]["folds"].size() == 2);
}
