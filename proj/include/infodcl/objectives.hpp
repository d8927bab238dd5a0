#pragma once

#include <vector>

#include "infodcl/common.hpp"

namespace infodcl {

struct LossWeights {
    double lambda_bpr = 0.7;   // mixes reconstruction (1 - lambda_bpr) against ranking
    double lambda_con = 5e-3;
    double lambda_bal = 1e-3;
    double lambda_reg = 5e-3;
    double tau = 0.2;

    void validate() const;
};

struct LossBreakdown {
    double recon = 0.0;
    double bpr = 0.0;
    double contrast = 0.0;
    double balance = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

struct ChannelLosses {
    double recon = 0.0;
    double contrast = 0.0;
    double balance = 0.0;
};

// Temperature-scaled contrastive loss between generated rows and their item
// rows, cosine similarity, in-batch denominator. Gradients (scaled by
// `weight`) accumulate into the optional buffers, which must be pre-sized.
double infonce_loss(const Mat& generated, const Mat& items, double tau, Mat* d_generated,
                    Mat* d_items, double weight);
double infonce_loss(const Mat& generated, const Mat& items, double tau);

// -sum ln sigmoid(pos - neg), softplus form.
double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                std::vector<double>* d_pos, std::vector<double>* d_neg, double weight);
double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

// Frobenius norm of the generated batch divided by the batch size.
double balance_loss(const Mat& generated, Mat* d_generated, double weight);
double balance_loss(const Mat& generated);

// Sum of squared norms over the touched item and user rows.
double reg_loss(const Mat& item_rows, const Mat& user_rows, Mat* d_items, Mat* d_users,
                double weight);
double reg_loss(const Mat& item_rows, const Mat& user_rows);

// Weighted combination; per-channel reconstruction/contrastive/balance terms
// are summed across channels before weighting.
LossBreakdown total_loss(const std::vector<ChannelLosses>& channels, double bpr, double reg,
                         const LossWeights& weights);

}  // namespace infodcl
