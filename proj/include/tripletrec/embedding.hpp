#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tripletrec/store.hpp"

namespace tripletrec {

/// Dense user and item vectors in one shared d-dimensional space, indexed
/// by store ordinals.
struct EmbeddingTable {
    int dim = 0;
    std::size_t num_users = 0;
    std::size_t num_items = 0;
    std::vector<double> user_data;  // num_users x dim, row-major
    std::vector<double> item_data;  // num_items x dim, row-major

    EmbeddingTable() = default;
    EmbeddingTable(std::size_t users, std::size_t items, int d)
        : dim(d),
          num_users(users),
          num_items(items),
          user_data(users * static_cast<std::size_t>(d), 0.0),
          item_data(items * static_cast<std::size_t>(d), 0.0) {}

    std::span<double> user_row(std::uint32_t u) {
        return {user_data.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> user_row(std::uint32_t u) const {
        return {user_data.data() + static_cast<std::size_t>(u) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<double> item_row(std::uint32_t t) {
        return {item_data.data() + static_cast<std::size_t>(t) * dim, static_cast<std::size_t>(dim)};
    }
    std::span<const double> item_row(std::uint32_t t) const {
        return {item_data.data() + static_cast<std::size_t>(t) * dim, static_cast<std::size_t>(dim)};
    }

    /// Entries uniform in [-1/sqrt(d), +1/sqrt(d)].
    static EmbeddingTable random(std::size_t users, std::size_t items, int d, std::uint64_t seed);
};

bool tables_equal(const EmbeddingTable& a, const EmbeddingTable& b);

/// Text checkpoint: line 1 is "<count> <dim>", then one "<type>=<id> f1 .. fd"
/// line per entity (type "user" or "song"), floats in shortest round-trip
/// decimal. Rows are written user-ordinal order first, then songs.
void save_table(const EmbeddingTable& table, const InteractionStore& store, const std::string& path);

/// Inverse of save_table. Every user and song of `store` must be present
/// with matching dimension; anything else is an error.
EmbeddingTable load_table(const std::string& path, const InteractionStore& store);

}  // namespace tripletrec
