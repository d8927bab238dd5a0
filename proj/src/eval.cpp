#include "infodcl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace infodcl {

double EvalReport::recall_at(int k) const {
    for (size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] == k) return recall[i];
    }
    throw Error("EvalReport: cutoff " + std::to_string(k) + " not present");
}

double EvalReport::ndcg_at(int k) const {
    for (size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] == k) return ndcg[i];
    }
    throw Error("EvalReport: cutoff " + std::to_string(k) + " not present");
}

void propagate_gcn(const Mat& users, const Mat& items, const NormalizedAdjacency& adj,
                   int layers, Mat& users_out, Mat& items_out) {
    if (layers < 0) throw Error("propagate_gcn: negative layer count");
    const int dim = users.cols;
    Mat u_cur = users;
    Mat i_cur = items;
    Mat u_sum = users;
    Mat i_sum = items;
    for (int k = 0; k < layers; ++k) {
        Mat u_next(users.rows, dim);
        Mat i_next(items.rows, dim);
        for (const auto& e : adj.entries) {
            const double* ir = i_cur.row(e.item);
            const double* ur = u_cur.row(e.user);
            double* un = u_next.row(e.user);
            double* in = i_next.row(e.item);
            for (int d = 0; d < dim; ++d) {
                un[d] += e.weight * ir[d];
                in[d] += e.weight * ur[d];
            }
        }
        for (size_t i = 0; i < u_sum.v.size(); ++i) u_sum.v[i] += u_next.v[i];
        for (size_t i = 0; i < i_sum.v.size(); ++i) i_sum.v[i] += i_next.v[i];
        u_cur = std::move(u_next);
        i_cur = std::move(i_next);
    }
    const double scale = 1.0 / (layers + 1);
    users_out = std::move(u_sum);
    items_out = std::move(i_sum);
    for (double& x : users_out.v) x *= scale;
    for (double& x : items_out.v) x *= scale;
}

std::vector<int> rank_topk(const double* user_vec, const Mat& items,
                           const std::vector<int>& exclude, int k) {
    if (k < 1) throw Error("rank_topk: cutoff must be >= 1");
    std::vector<std::pair<double, int>> scored;
    scored.reserve(items.rows);
    for (int i = 0; i < items.rows; ++i) {
        if (std::binary_search(exclude.begin(), exclude.end(), i)) continue;
        scored.emplace_back(dot(user_vec, items.row(i), items.cols), i);
    }
    const int take = std::min<int>(k, static_cast<int>(scored.size()));
    auto cmp = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), cmp);
    std::vector<int> out(take);
    for (int i = 0; i < take; ++i) out[i] = scored[i].second;
    return out;
}

EvalReport ranking_metrics(const Mat& users, const Mat& items, const InteractionDataset& ds,
                           EvalSplit split, const std::vector<int>& cutoffs) {
    EvalReport report;
    report.cutoffs = cutoffs;
    report.recall.assign(cutoffs.size(), 0.0);
    report.ndcg.assign(cutoffs.size(), 0.0);
    const int max_k = *std::max_element(cutoffs.begin(), cutoffs.end());

    for (int u = 0; u < ds.num_users; ++u) {
        const std::vector<int>& truth =
            split == EvalSplit::test ? ds.user_test_items[u] : ds.user_valid_items[u];
        if (truth.empty()) {
            ++report.users_skipped;
            continue;
        }
        const std::vector<int> top = rank_topk(users.row(u), items, ds.user_train_items[u], max_k);
        for (size_t c = 0; c < cutoffs.size(); ++c) {
            const int k = cutoffs[c];
            int hits = 0;
            double dcg = 0.0;
            for (int r = 0; r < std::min<int>(k, static_cast<int>(top.size())); ++r) {
                if (std::binary_search(truth.begin(), truth.end(), top[r])) {
                    ++hits;
                    dcg += 1.0 / std::log2(r + 2.0);
                }
            }
            double idcg = 0.0;
            const int ideal = std::min<int>(k, static_cast<int>(truth.size()));
            for (int r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(r + 2.0);
            report.recall[c] += static_cast<double>(hits) / truth.size();
            report.ndcg[c] += idcg > 0.0 ? dcg / idcg : 0.0;
        }
        ++report.users_evaluated;
    }
    if (report.users_evaluated > 0) {
        for (size_t c = 0; c < cutoffs.size(); ++c) {
            report.recall[c] /= report.users_evaluated;
            report.ndcg[c] /= report.users_evaluated;
        }
    }
    return report;
}

std::string report_text(const EvalReport& report) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << "users_evaluated = " << report.users_evaluated << '\n';
    out << "users_skipped = " << report.users_skipped << '\n';
    out << "config_hash = " << report.config_hash << '\n';
    for (size_t c = 0; c < report.cutoffs.size(); ++c) {
        out << "recall@" << report.cutoffs[c] << " = " << report.recall[c] << '\n';
        out << "ndcg@" << report.cutoffs[c] << " = " << report.ndcg[c] << '\n';
    }
    return out.str();
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed;
    out << "metric,cutoff,value\n";
    for (size_t c = 0; c < report.cutoffs.size(); ++c) {
        out << "recall," << report.cutoffs[c] << ',' << report.recall[c] << '\n';
        out << "ndcg," << report.cutoffs[c] << ',' << report.ndcg[c] << '\n';
    }
    return out.str();
}

}  // namespace infodcl
