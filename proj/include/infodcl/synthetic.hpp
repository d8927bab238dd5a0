#pragma once

#include <string>
#include <utility>
#include <vector>

#include "infodcl/dataset.hpp"

namespace infodcl {

// Clustered implicit-feedback generator for desk-scale experiments: users and
// items carry latent cluster assignments, users interact mostly inside their
// cluster, and item popularity is skewed within clusters.
struct SyntheticSpec {
    int num_users = 943;
    int num_items = 1682;
    int num_clusters = 8;
    double in_cluster_prob = 0.85;
    int min_per_user = 8;
    int max_per_user = 300;
    double mean_per_user = 106.0;  // geometric-ish spread around this
    double popularity_skew = 1.0;  // zipf exponent within a cluster
    uint64_t seed = 2024;
};

std::vector<std::pair<std::string, std::string>> synth_interactions(const SyntheticSpec& spec);

void write_interactions_file(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& pairs,
                             const std::string& delimiter = "\t");

// Convenience: generate, re-index and split in one go.
InteractionDataset synth_dataset(const SyntheticSpec& spec, double r_train = 0.8,
                                 double r_valid = 0.1, double r_test = 0.1);

}  // namespace infodcl
