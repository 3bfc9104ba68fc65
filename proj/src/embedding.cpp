#include "tripletrec/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tripletrec/error.hpp"
#include "tripletrec/rng.hpp"

namespace tripletrec {

namespace {

void append_double(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& path, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(path + ":" + std::to_string(line_no) + ": invalid float '" + std::string(s) + "'");
    return v;
}

}  // namespace

EmbeddingTable EmbeddingTable::random(std::size_t users, std::size_t items, int d, std::uint64_t seed) {
    EmbeddingTable table(users, items, d);
    Rng rng(mix_seed(seed, 0x696e6974ULL));
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& v : table.user_data) v = rng.uniform(-bound, bound);
    for (double& v : table.item_data) v = rng.uniform(-bound, bound);
    return table;
}

bool tables_equal(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.dim == b.dim && a.num_users == b.num_users && a.num_items == b.num_items &&
           a.user_data == b.user_data && a.item_data == b.item_data;
}

void save_table(const EmbeddingTable& table, const InteractionStore& store, const std::string& path) {
    if (table.num_users != store.num_users() || table.num_items != store.num_tracks())
        throw Error("save_table: table shape does not match store");
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);

    std::string line;
    out << (table.num_users + table.num_items) << ' ' << table.dim << '\n';
    for (std::uint32_t u = 0; u < table.num_users; ++u) {
        line.clear();
        line += "user=";
        line += store.users[u].id;
        for (const double v : table.user_row(u)) {
            line += ' ';
            append_double(line, v);
        }
        line += '\n';
        out << line;
    }
    for (std::uint32_t t = 0; t < table.num_items; ++t) {
        line.clear();
        line += "song=";
        line += store.tracks[t].id;
        for (const double v : table.item_row(t)) {
            line += ' ';
            append_double(line, v);
        }
        line += '\n';
        out << line;
    }
}

EmbeddingTable load_table(const std::string& path, const InteractionStore& store) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);

    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw Error(path + ": empty checkpoint");
    std::istringstream header(line);
    std::size_t count = 0;
    int dim = 0;
    if (!(header >> count >> dim) || dim < 1) throw Error(path + ":1: malformed header '" + line + "'");

    EmbeddingTable table(store.num_users(), store.num_tracks(), dim);
    std::vector<bool> seen_user(store.num_users(), false), seen_item(store.num_tracks(), false);

    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++rows;

        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos) throw Error(path + ":" + std::to_string(line_no) + ": missing vector");
        const std::string token = line.substr(0, sp);
        const std::size_t eq = token.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) + ": token '" + token + "' is not type=id");
        const std::string type = token.substr(0, eq);
        const std::string id = token.substr(eq + 1);

        std::span<double> row;
        if (type == "user") {
            const auto it = store.user_ordinal.find(id);
            if (it == store.user_ordinal.end())
                throw Error(path + ":" + std::to_string(line_no) + ": unknown user id '" + id + "'");
            seen_user[it->second] = true;
            row = table.user_row(it->second);
        } else if (type == "song") {
            const auto it = store.track_ordinal.find(id);
            if (it == store.track_ordinal.end())
                throw Error(path + ":" + std::to_string(line_no) + ": unknown track id '" + id + "'");
            seen_item[it->second] = true;
            row = table.item_row(it->second);
        } else {
            throw Error(path + ":" + std::to_string(line_no) + ": unknown token type '" + type + "'");
        }

        std::size_t pos = sp;
        for (int k = 0; k < dim; ++k) {
            while (pos < line.size() && line[pos] == ' ') ++pos;
            const std::size_t end = line.find(' ', pos);
            const std::size_t stop = end == std::string::npos ? line.size() : end;
            if (pos >= line.size())
                throw Error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                            " components, got " + std::to_string(k));
            row[k] = parse_double(std::string_view(line).substr(pos, stop - pos), path, line_no);
            pos = stop;
        }
        while (pos < line.size() && line[pos] == ' ') ++pos;
        if (pos != line.size())
            throw Error(path + ":" + std::to_string(line_no) + ": more than " + std::to_string(dim) + " components");
    }

    if (rows != count)
        throw Error(path + ": header declares " + std::to_string(count) + " rows, found " + std::to_string(rows));
    for (std::uint32_t u = 0; u < store.num_users(); ++u)
        if (!seen_user[u]) throw Error(path + ": missing vector for user '" + store.users[u].id + "'");
    for (std::uint32_t t = 0; t < store.num_tracks(); ++t)
        if (!seen_item[t]) throw Error(path + ": missing vector for song '" + store.tracks[t].id + "'");
    return table;
}

}  // namespace tripletrec
