#pragma once

#include <string>
#include <utility>
#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/dataset.hpp"

namespace infodcl {

enum class Side { user, item };

// Frozen per-node semantic vectors. Never receives gradients.
struct MetadataMatrix {
    Side side = Side::item;
    Mat rows;
};

struct SimilarityGraph {
    Side side = Side::item;
    int k = 0;
    // per node: (neighbor index, cosine score), descending score,
    // ties broken by ascending index, self excluded, zero scores dropped
    std::vector<std::vector<std::pair<int, double>>> neighbors;
};

struct PretrainConfig {
    int layers = 2;
    int dim = 64;
    int epochs = 20;
    double learning_rate = 5e-3;
    int batch = 1024;
    uint64_t seed = 101;
};

struct PretrainedEmbeddings {
    Mat users;  // propagated, frozen
    Mat items;
    std::vector<double> epoch_bpr;  // mean BPR per epoch (index 0 = before training)
};

// Graph-propagated embedding tables trained with BPR; the readout is the mean
// over propagation layers 0..K. epochs = 0 returns the initialized tables
// propagated once. Aborts with the last finite epoch if the loss diverges.
PretrainedEmbeddings pretrain_base_embeddings(const InteractionDataset& ds,
                                              const PretrainConfig& cfg);

// Cosine similarity over binary interaction rows (users) or columns (items),
// top-k per node. Nodes without interactions get empty lists.
SimilarityGraph build_similarity_graph(const InteractionDataset& ds, Side side, int k);

// Row n = mean of the pretrained embeddings of n's neighbors; nodes with an
// empty neighbor list fall back to their own pretrained row.
MetadataMatrix synthesize_metadata(const Mat& pretrained_rows, Side side,
                                   const SimilarityGraph& graph);

// One normalized-adjacency hop: moves user-side metadata onto items.
Mat project_user_metadata_to_items(const Mat& user_rows, const NormalizedAdjacency& adj);

// Plain-text matrix, one row per node, `dim` columns.
Mat load_metadata_file(const std::string& path, int expected_rows, int expected_dim);
void save_matrix_text(const Mat& m, const std::string& path);
Mat load_matrix_text(const std::string& path);

}  // namespace infodcl
