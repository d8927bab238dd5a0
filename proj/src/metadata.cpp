#include "infodcl/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "infodcl/objectives.hpp"
#include "infodcl/optimizer.hpp"
#include "infodcl/param_tensor.hpp"

namespace infodcl {

namespace {

Mat to_mat(const ParamTensor& t) {
    Mat m(t.shape[0], t.shape[1]);
    for (size_t i = 0; i < t.size(); ++i) m.v[i] = t.get(i);
    return m;
}

struct PropagationStack {
    std::vector<Mat> user_layers;  // 0..K
    std::vector<Mat> item_layers;
    Mat users_mean;
    Mat items_mean;
};

void propagate_layers(const Mat& users, const Mat& items, const NormalizedAdjacency& adj,
                      int layers, PropagationStack& st) {
    const int dim = users.cols;
    st.user_layers.assign(1, users);
    st.item_layers.assign(1, items);
    for (int k = 0; k < layers; ++k) {
        Mat u_next(users.rows, dim);
        Mat i_next(items.rows, dim);
        const Mat& u_prev = st.user_layers.back();
        const Mat& i_prev = st.item_layers.back();
        for (const auto& e : adj.entries) {
            const double* ir = i_prev.row(e.item);
            const double* ur = u_prev.row(e.user);
            double* un = u_next.row(e.user);
            double* in = i_next.row(e.item);
            for (int d = 0; d < dim; ++d) {
                un[d] += e.weight * ir[d];
                in[d] += e.weight * ur[d];
            }
        }
        st.user_layers.push_back(std::move(u_next));
        st.item_layers.push_back(std::move(i_next));
    }
    st.users_mean = Mat(users.rows, dim);
    st.items_mean = Mat(items.rows, dim);
    const double scale = 1.0 / (layers + 1);
    for (const Mat& layer : st.user_layers) {
        for (size_t i = 0; i < layer.v.size(); ++i) st.users_mean.v[i] += scale * layer.v[i];
    }
    for (const Mat& layer : st.item_layers) {
        for (size_t i = 0; i < layer.v.size(); ++i) st.items_mean.v[i] += scale * layer.v[i];
    }
}

// Adjoint of propagate_layers' readout: pushes the mean-table gradients back
// through K alternating hops onto the base tables.
void propagate_backward(const Mat& d_users_mean, const Mat& d_items_mean,
                        const NormalizedAdjacency& adj, int layers, Mat& d_base_users,
                        Mat& d_base_items) {
    const int dim = d_users_mean.cols;
    const double scale = 1.0 / (layers + 1);
    Mat cur_du = d_users_mean;
    Mat cur_di = d_items_mean;
    for (double& x : cur_du.v) x *= scale;
    for (double& x : cur_di.v) x *= scale;
    for (int k = layers; k >= 1; --k) {
        Mat prev_du = d_users_mean;
        Mat prev_di = d_items_mean;
        for (double& x : prev_du.v) x *= scale;
        for (double& x : prev_di.v) x *= scale;
        for (const auto& e : adj.entries) {
            const double* du = cur_du.row(e.user);
            const double* di = cur_di.row(e.item);
            double* pi = prev_di.row(e.item);
            double* pu = prev_du.row(e.user);
            for (int d = 0; d < dim; ++d) {
                pi[d] += e.weight * du[d];  // U_k row u pulled from E_{k-1} row i
                pu[d] += e.weight * di[d];  // E_k row i pulled from U_{k-1} row u
            }
        }
        cur_du = std::move(prev_du);
        cur_di = std::move(prev_di);
    }
    d_base_users = std::move(cur_du);
    d_base_items = std::move(cur_di);
}

}  // namespace

PretrainedEmbeddings pretrain_base_embeddings(const InteractionDataset& ds,
                                              const PretrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("pretrain: negative epoch count");
    if (cfg.layers < 0) throw ConfigError("pretrain: negative layer count");
    ParamTensor base_u = init_params("pretrain.user", {ds.num_users, cfg.dim},
                                     InitScheme::xavier, mix_seed(cfg.seed, 1));
    ParamTensor base_e = init_params("pretrain.item", {ds.num_items, cfg.dim},
                                     InitScheme::xavier, mix_seed(cfg.seed, 2));
    const NormalizedAdjacency adj = build_normalized_adjacency(ds);

    std::vector<ParamTensor*> params{&base_u, &base_e};
    OptimizerState opt;
    opt.kind = OptKind::adam;
    opt.learning_rate = cfg.learning_rate;
    opt.attach(params);

    Rng rng(mix_seed(cfg.seed, 3));
    PretrainedEmbeddings result;
    const int batches_per_epoch =
        std::max<int>(1, static_cast<int>(ds.train.size()) / std::max(1, cfg.batch));

    double last_finite_epoch_loss = 0.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int b = 0; b < batches_per_epoch; ++b) {
            const std::vector<BprTriple> batch = sample_bpr_triples(ds, cfg.batch, rng);
            PropagationStack st;
            propagate_layers(to_mat(base_u), to_mat(base_e), adj, cfg.layers, st);

            std::vector<double> pos_scores(batch.size()), neg_scores(batch.size());
            for (size_t i = 0; i < batch.size(); ++i) {
                const double* u = st.users_mean.row(batch[i].user);
                pos_scores[i] = dot(u, st.items_mean.row(batch[i].pos), cfg.dim);
                neg_scores[i] = dot(u, st.items_mean.row(batch[i].neg), cfg.dim);
            }
            std::vector<double> d_pos, d_neg;
            const double loss =
                bpr_loss(pos_scores, neg_scores, &d_pos, &d_neg, 1.0 / batch.size());
            if (!std::isfinite(loss)) {
                throw NumericError("pretrain: loss diverged at epoch " + std::to_string(epoch) +
                                   "; last finite epoch mean was " +
                                   std::to_string(last_finite_epoch_loss));
            }
            epoch_loss += loss;

            Mat d_users(ds.num_users, cfg.dim);
            Mat d_items(ds.num_items, cfg.dim);
            for (size_t i = 0; i < batch.size(); ++i) {
                const double* u = st.users_mean.row(batch[i].user);
                const double* ep = st.items_mean.row(batch[i].pos);
                const double* en = st.items_mean.row(batch[i].neg);
                double* du = d_users.row(batch[i].user);
                double* dp = d_items.row(batch[i].pos);
                double* dn = d_items.row(batch[i].neg);
                for (int d = 0; d < cfg.dim; ++d) {
                    du[d] += d_pos[i] * ep[d] + d_neg[i] * en[d];
                    dp[d] += d_pos[i] * u[d];
                    dn[d] += d_neg[i] * u[d];
                }
            }
            Mat d_base_u, d_base_e;
            propagate_backward(d_users, d_items, adj, cfg.layers, d_base_u, d_base_e);
            base_u.zero_grad();
            base_e.zero_grad();
            for (size_t i = 0; i < base_u.size(); ++i) base_u.grad[i] = d_base_u.v[i];
            for (size_t i = 0; i < base_e.size(); ++i) base_e.grad[i] = d_base_e.v[i];
            optimizer_step(params, opt);
        }
        epoch_loss /= batches_per_epoch;
        result.epoch_bpr.push_back(epoch_loss);
        last_finite_epoch_loss = epoch_loss;
    }

    PropagationStack st;
    propagate_layers(to_mat(base_u), to_mat(base_e), adj, cfg.layers, st);
    result.users = std::move(st.users_mean);
    result.items = std::move(st.items_mean);
    return result;
}

SimilarityGraph build_similarity_graph(const InteractionDataset& ds, Side side, int k) {
    if (k < 1) throw ConfigError("build_similarity_graph: k must be >= 1");
    const int n = side == Side::user ? ds.num_users : ds.num_items;
    const auto& own = side == Side::user ? ds.user_train_items : ds.item_train_users;
    const auto& other = side == Side::user ? ds.item_train_users : ds.user_train_items;

    SimilarityGraph graph;
    graph.side = side;
    graph.k = k;
    graph.neighbors.assign(n, {});

    std::vector<int> count(n, 0);
    std::vector<int> touched;
    for (int a = 0; a < n; ++a) {
        if (own[a].empty()) continue;
        touched.clear();
        for (int mid : own[a]) {
            for (int b : other[mid]) {
                if (b == a) continue;
                if (count[b] == 0) touched.push_back(b);
                ++count[b];
            }
        }
        std::vector<std::pair<int, double>> cand;
        cand.reserve(touched.size());
        const double deg_a = static_cast<double>(own[a].size());
        for (int b : touched) {
            const double score = count[b] / std::sqrt(deg_a * own[b].size());
            cand.emplace_back(b, score);
            count[b] = 0;
        }
        auto cmp = [](const std::pair<int, double>& x, const std::pair<int, double>& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        };
        const int take = std::min<int>(k, static_cast<int>(cand.size()));
        std::partial_sort(cand.begin(), cand.begin() + take, cand.end(), cmp);
        cand.resize(take);
        graph.neighbors[a] = std::move(cand);
    }
    return graph;
}

MetadataMatrix synthesize_metadata(const Mat& pretrained_rows, Side side,
                                   const SimilarityGraph& graph) {
    if (graph.side != side) throw Error("synthesize_metadata: graph side mismatch");
    if (static_cast<int>(graph.neighbors.size()) != pretrained_rows.rows) {
        throw Error("synthesize_metadata: node count mismatch");
    }
    MetadataMatrix meta;
    meta.side = side;
    meta.rows = Mat(pretrained_rows.rows, pretrained_rows.cols);
    const int dim = pretrained_rows.cols;
    for (int nidx = 0; nidx < pretrained_rows.rows; ++nidx) {
        double* out = meta.rows.row(nidx);
        const auto& nbrs = graph.neighbors[nidx];
        if (nbrs.empty()) {
            const double* self = pretrained_rows.row(nidx);
            std::copy(self, self + dim, out);
            continue;
        }
        for (const auto& [b, score] : nbrs) {
            const double* r = pretrained_rows.row(b);
            for (int d = 0; d < dim; ++d) out[d] += r[d];
        }
        const double inv = 1.0 / nbrs.size();
        for (int d = 0; d < dim; ++d) out[d] *= inv;
    }
    if (!all_finite(meta.rows)) throw NumericError("synthesize_metadata: non-finite metadata");
    return meta;
}

Mat project_user_metadata_to_items(const Mat& user_rows, const NormalizedAdjacency& adj) {
    Mat out(adj.num_items, user_rows.cols);
    for (const auto& e : adj.entries) {
        const double* ur = user_rows.row(e.user);
        double* ir = out.row(e.item);
        for (int d = 0; d < user_rows.cols; ++d) ir[d] += e.weight * ur[d];
    }
    return out;
}

void save_matrix_text(const Mat& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_matrix_text: cannot write '" + path + "'");
    out.precision(17);
    for (int r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (int c = 0; c < m.cols; ++c) {
            if (c) out << ' ';
            out << row[c];
        }
        out << '\n';
    }
}

Mat load_matrix_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_matrix_text: cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        double x = 0.0;
        while (ss >> x) row.push_back(x);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("load_matrix_text: empty matrix in '" + path + "'");
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) {
            throw DataError("load_matrix_text: ragged rows in '" + path + "'");
        }
        for (size_t c = 0; c < rows[r].size(); ++c) m.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

Mat load_metadata_file(const std::string& path, int expected_rows, int expected_dim) {
    Mat m = load_matrix_text(path);
    if (m.rows != expected_rows || m.cols != expected_dim) {
        throw DataError("load_metadata_file: '" + path + "' is " + std::to_string(m.rows) + "x" +
                        std::to_string(m.cols) + ", expected " + std::to_string(expected_rows) +
                        "x" + std::to_string(expected_dim));
    }
    if (!all_finite(m)) throw DataError("load_metadata_file: non-finite entries in '" + path + "'");
    return m;
}

}  // namespace infodcl
