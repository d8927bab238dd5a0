#pragma once

#include <string>
#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/dataset.hpp"

namespace infodcl {

struct EvalReport {
    std::vector<int> cutoffs;
    std::vector<double> recall;  // parallel to cutoffs
    std::vector<double> ndcg;
    int users_evaluated = 0;
    int users_skipped = 0;
    uint64_t config_hash = 0;

    double recall_at(int k) const;
    double ndcg_at(int k) const;
};

// K rounds of alternating bipartite propagation; the readout is the mean of
// the layer-0..K tables. K = 0 returns the inputs unchanged.
void propagate_gcn(const Mat& users, const Mat& items, const NormalizedAdjacency& adj,
                   int layers, Mat& users_out, Mat& items_out);

// Inner-product scores over the full catalog minus `exclude` (sorted item
// indices), descending, ties broken by ascending item index.
std::vector<int> rank_topk(const double* user_vec, const Mat& items,
                           const std::vector<int>& exclude, int k);

enum class EvalSplit { valid, test };

// All-ranking Recall@K / NDCG@K averaged over users with ground truth in the
// chosen split. Candidates exclude only the user's train items.
EvalReport ranking_metrics(const Mat& users, const Mat& items, const InteractionDataset& ds,
                           EvalSplit split, const std::vector<int>& cutoffs);

std::string report_text(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace infodcl
