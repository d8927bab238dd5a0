#include "infodcl/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace infodcl {

void LossWeights::validate() const {
    if (lambda_bpr < 0.0 || lambda_bpr > 1.0) {
        throw ConfigError("loss weights: lambda_bpr must lie in [0, 1]");
    }
    if (lambda_con < 0.0 || lambda_bal < 0.0 || lambda_reg < 0.0) {
        throw ConfigError("loss weights: coefficients must be non-negative");
    }
    if (tau <= 0.0) throw ConfigError("loss weights: tau must be positive");
}

namespace {
constexpr double kNormFloor = 1e-12;
}

double infonce_loss(const Mat& generated, const Mat& items, double tau, Mat* d_generated,
                    Mat* d_items, double weight) {
    if (generated.rows != items.rows || generated.cols != items.cols) {
        throw Error("infonce_loss: shape mismatch");
    }
    if (generated.rows < 1) throw Error("infonce_loss: empty batch");
    if (tau <= 0.0) throw Error("infonce_loss: tau must be positive");
    const int n = generated.rows;
    const int dim = generated.cols;

    std::vector<double> gen_norm(n), item_norm(n);
    for (int i = 0; i < n; ++i) {
        gen_norm[i] = std::sqrt(dot(generated.row(i), generated.row(i), dim));
        item_norm[i] = std::sqrt(dot(items.row(i), items.row(i), dim));
    }

    // cosine matrix; zero-norm rows contribute zero similarity
    Mat cos(n, n);
    for (int i = 0; i < n; ++i) {
        const double* gi = generated.row(i);
        for (int j = 0; j < n; ++j) {
            const double denom = gen_norm[i] * item_norm[j];
            cos.at(i, j) = denom > kNormFloor ? dot(gi, items.row(j), dim) / denom : 0.0;
        }
    }

    double loss = 0.0;
    Mat q;  // dL/dcos, filled only when gradients are requested
    const bool want_grad = d_generated || d_items;
    if (want_grad) q = Mat(n, n);
    for (int i = 0; i < n; ++i) {
        double row_max = -1e300;
        for (int j = 0; j < n; ++j) row_max = std::max(row_max, cos.at(i, j) / tau);
        double lse = 0.0;
        for (int j = 0; j < n; ++j) lse += std::exp(cos.at(i, j) / tau - row_max);
        const double log_denom = row_max + std::log(lse);
        loss += log_denom - cos.at(i, i) / tau;
        if (want_grad) {
            for (int j = 0; j < n; ++j) {
                const double p = std::exp(cos.at(i, j) / tau - log_denom);
                q.at(i, j) = (p - (i == j ? 1.0 : 0.0)) / tau * weight;
            }
        }
    }

    if (want_grad) {
        for (int i = 0; i < n; ++i) {
            const double* gi = generated.row(i);
            const double ni = gen_norm[i];
            double coeff_self = 0.0;  // sum_j q_ij * cos_ij, scales the -g_i/n_i^2 term
            for (int j = 0; j < n; ++j) {
                const double nj = item_norm[j];
                if (ni <= kNormFloor || nj <= kNormFloor) continue;
                const double qij = q.at(i, j);
                if (qij == 0.0) continue;
                const double* ej = items.row(j);
                const double inv = 1.0 / (ni * nj);
                const double cij = cos.at(i, j);
                coeff_self += qij * cij;
                if (d_generated) {
                    double* dg = d_generated->row(i);
                    for (int d = 0; d < dim; ++d) dg[d] += qij * ej[d] * inv;
                }
                if (d_items) {
                    double* de = d_items->row(j);
                    const double self_j = qij * cij / (nj * nj);
                    for (int d = 0; d < dim; ++d) de[d] += qij * gi[d] * inv - self_j * ej[d];
                }
            }
            if (d_generated && ni > kNormFloor) {
                double* dg = d_generated->row(i);
                const double s = coeff_self / (ni * ni);
                for (int d = 0; d < dim; ++d) dg[d] -= s * gi[d];
            }
        }
    }
    return loss;
}

double infonce_loss(const Mat& generated, const Mat& items, double tau) {
    return infonce_loss(generated, items, tau, nullptr, nullptr, 1.0);
}

double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                std::vector<double>* d_pos, std::vector<double>* d_neg, double weight) {
    if (pos_scores.size() != neg_scores.size()) throw Error("bpr_loss: length mismatch");
    if (d_pos) d_pos->assign(pos_scores.size(), 0.0);
    if (d_neg) d_neg->assign(neg_scores.size(), 0.0);
    double loss = 0.0;
    for (size_t i = 0; i < pos_scores.size(); ++i) {
        const double x = pos_scores[i] - neg_scores[i];
        loss += softplus(-x);
        if (d_pos) {
            const double g = -sigmoid(-x) * weight;
            (*d_pos)[i] = g;
            (*d_neg)[i] = -g;
        }
    }
    return loss;
}

double bpr_loss(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
    return bpr_loss(pos_scores, neg_scores, nullptr, nullptr, 1.0);
}

double balance_loss(const Mat& generated, Mat* d_generated, double weight) {
    if (generated.rows < 1) throw Error("balance_loss: empty batch");
    const double fro = frobenius_norm(generated);
    const double loss = fro / generated.rows;
    if (d_generated && fro > kNormFloor) {
        const double s = weight / (generated.rows * fro);
        for (size_t i = 0; i < generated.v.size(); ++i) d_generated->v[i] += s * generated.v[i];
    }
    return loss;
}

double balance_loss(const Mat& generated) { return balance_loss(generated, nullptr, 1.0); }

double reg_loss(const Mat& item_rows, const Mat& user_rows, Mat* d_items, Mat* d_users,
                double weight) {
    double loss = 0.0;
    for (double x : item_rows.v) loss += x * x;
    for (double x : user_rows.v) loss += x * x;
    if (d_items) {
        for (size_t i = 0; i < item_rows.v.size(); ++i) {
            d_items->v[i] += 2.0 * weight * item_rows.v[i];
        }
    }
    if (d_users) {
        for (size_t i = 0; i < user_rows.v.size(); ++i) {
            d_users->v[i] += 2.0 * weight * user_rows.v[i];
        }
    }
    return loss;
}

double reg_loss(const Mat& item_rows, const Mat& user_rows) {
    return reg_loss(item_rows, user_rows, nullptr, nullptr, 1.0);
}

LossBreakdown total_loss(const std::vector<ChannelLosses>& channels, double bpr, double reg,
                         const LossWeights& weights) {
    weights.validate();
    LossBreakdown b;
    for (const ChannelLosses& c : channels) {
        b.recon += c.recon;
        b.contrast += c.contrast;
        b.balance += c.balance;
    }
    b.bpr = bpr;
    b.reg = reg;
    b.total = (1.0 - weights.lambda_bpr) * b.recon + weights.lambda_bpr * b.bpr +
              weights.lambda_con * b.contrast + weights.lambda_bal * b.balance +
              weights.lambda_reg * b.reg;
    return b;
}

}  // namespace infodcl
