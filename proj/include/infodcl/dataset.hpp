#pragma once

#include <string>
#include <utility>
#include <vector>

#include "infodcl/common.hpp"

namespace infodcl {

// Implicit-feedback interactions with dense user/item index spaces.
// Neighbor lists are built from the train split only.
struct InteractionDataset {
    int num_users = 0;
    int num_items = 0;
    std::vector<std::pair<int, int>> train;
    std::vector<std::pair<int, int>> valid;
    std::vector<std::pair<int, int>> test;
    std::vector<std::string> user_ids;  // dense index -> raw id
    std::vector<std::string> item_ids;

    // derived from train; sorted ascending for binary search
    std::vector<std::vector<int>> user_train_items;
    std::vector<std::vector<int>> item_train_users;
    std::vector<std::vector<int>> user_valid_items;
    std::vector<std::vector<int>> user_test_items;

    size_t total_interactions() const { return train.size() + valid.size() + test.size(); }
    double sparsity() const;
    bool user_has_train_item(int user, int item) const;
    void rebuild_index();
    void check_invariants() const;
};

struct LoadFormat {
    // "auto" tries tab, comma, "::" and whitespace; otherwise used literally
    std::string delimiter = "auto";
};

// Reads "user item [rating] [timestamp]" lines, collapses duplicate pairs,
// and re-indexes raw ids densely in first-appearance order. The result is
// unsplit: every edge lands in `train`.
InteractionDataset load_interactions(const std::string& path, const LoadFormat& fmt = {});

// Per-user random split. Every user keeps at least one train interaction;
// users with a single interaction go entirely to train.
InteractionDataset split_dataset(InteractionDataset ds, double r_train, double r_valid,
                                 double r_test, uint64_t seed);

struct NormalizedAdjacency {
    struct Entry {
        int user;
        int item;
        double weight;  // 1 / sqrt(deg(u) * deg(i))
    };
    int num_users = 0;
    int num_items = 0;
    std::vector<Entry> entries;
};

NormalizedAdjacency build_normalized_adjacency(const InteractionDataset& ds);

struct BprTriple {
    int user;
    int pos;
    int neg;
};

// Uniform user, uniform positive from the user's train items, uniform
// negative from items the user has not interacted with in train.
std::vector<BprTriple> sample_bpr_triples(const InteractionDataset& ds, int batch_size,
                                          Rng& rng);

// Plain-text processed dataset directory: edge lists per split plus id maps.
void save_processed(const InteractionDataset& ds, const std::string& dir);
InteractionDataset load_processed(const std::string& dir);

}  // namespace infodcl
