#include "infodcl/psnet.hpp"

#include <algorithm>
#include <cmath>

namespace infodcl {

PSNetParams PSNetParams::make(int dim, int rank, PsnetVariant variant, uint64_t seed,
                              double ln_eps) {
    if (dim < 1) throw ConfigError("psnet: dim must be >= 1");
    if (rank < 1 || rank > dim) throw ConfigError("psnet: rank must lie in [1, dim]");
    PSNetParams p;
    p.dim = dim;
    p.rank = rank;
    p.ln_eps = ln_eps;
    p.variant = variant;
    if (variant == PsnetVariant::no_psnet) return p;

    if (p.has_spectral()) {
        const int hidden = 2 * rank;
        p.mlp_u = Mlp::make("psnet.mlp_u", {rank, hidden, rank}, {Act::relu, Act::linear},
                            mix_seed(seed, 11));
        p.mlp_v = Mlp::make("psnet.mlp_v", {dim, hidden, rank}, {Act::relu, Act::linear},
                            mix_seed(seed, 12));
        p.mlp_s = Mlp::make("psnet.mlp_s", {rank, hidden, rank}, {Act::relu, Act::linear},
                            mix_seed(seed, 13));
        p.phi_fuse = Mlp::make("psnet.phi_fuse", {3 * rank, dim}, {Act::tanh_act},
                               mix_seed(seed, 14));
        p.alpha = init_params("psnet.alpha", {dim}, InitScheme::zeros);
    }
    if (p.has_reencode()) {
        p.psi_map = init_params("psnet.psi_map", {dim, dim}, InitScheme::xavier,
                                mix_seed(seed, 15));
        p.rho = init_params("psnet.rho", {1}, InitScheme::zeros);
        p.eta0 = init_params("psnet.eta0", {1}, InitScheme::constant, 0, 1.0);
    }
    p.phi_map = init_identity("psnet.phi_map", dim);
    p.eta1 = init_params("psnet.eta1", {1}, InitScheme::constant, 0, 1.0);
    return p;
}

void PSNetParams::collect_params(std::vector<ParamTensor*>& out) {
    if (variant == PsnetVariant::no_psnet) return;
    if (has_spectral()) {
        mlp_u.collect_params(out);
        mlp_v.collect_params(out);
        mlp_s.collect_params(out);
        phi_fuse.collect_params(out);
        out.push_back(&alpha);
    }
    if (has_reencode()) {
        out.push_back(&psi_map);
        out.push_back(&rho);
        out.push_back(&eta0);
    }
    out.push_back(&phi_map);
    out.push_back(&eta1);
}

namespace {

void check_shapes(const Mat& eps, const Mat& meta, const PSNetParams& params) {
    if (eps.rows != meta.rows || eps.cols != meta.cols || eps.cols != params.dim) {
        throw Error("psnet: shape mismatch between noise, metadata and params");
    }
    if (eps.rows < 1) throw Error("psnet: empty batch");
}

Mat project_metadata(const Mat& meta, const PSNetParams& params) {
    Mat out;
    affine_forward(meta, params.phi_map, nullptr, out);
    return out;
}

}  // namespace

Mat spectral_rectify(const Mat& eps, const Mat& meta, PSNetParams& params, PsnetCache* cache) {
    check_shapes(eps, meta, params);
    if (!params.has_spectral()) throw Error("spectral_rectify: path disabled by variant");
    const int batch = eps.rows;
    const int dim = params.dim;
    const int rank = params.rank;

    PsnetCache local;
    PsnetCache& c = cache ? *cache : local;
    SpectralCache& sc = c.sr;

    sc.y = Mat(batch, dim);
    for (size_t i = 0; i < sc.y.v.size(); ++i) sc.y.v[i] = eps.v[i] + meta.v[i];

    // Factors are constants for the gradient: nothing learnable feeds them.
    const int d_eff = std::min({rank, batch, dim});
    sc.svd = truncated_svd(sc.y, d_eff);

    Mat u_coeff(batch, rank);  // zero-padded past the effective rank
    for (int r = 0; r < batch; ++r) {
        for (int j = 0; j < d_eff; ++j) u_coeff.at(r, j) = sc.svd.u.at(r, j);
    }
    sc.sigma_row = Mat(1, rank);
    for (int j = 0; j < d_eff; ++j) sc.sigma_row.at(0, j) = sc.svd.sigma[j];
    sc.vtop_row = Mat(1, dim);
    for (int i = 0; i < dim; ++i) sc.vtop_row.at(0, i) = sc.svd.v.at(i, 0);

    const Mat au = params.mlp_u.forward(u_coeff, &sc.mu);
    const Mat av = params.mlp_v.forward(sc.vtop_row, &sc.mv);
    const Mat as = params.mlp_s.forward(sc.sigma_row, &sc.ms);

    sc.concat = Mat(batch, 3 * rank);
    for (int r = 0; r < batch; ++r) {
        double* row = sc.concat.row(r);
        for (int j = 0; j < rank; ++j) {
            row[j] = au.at(r, j);
            row[rank + j] = av.at(0, j);
            row[2 * rank + j] = as.at(0, j);
        }
    }
    sc.fused = params.phi_fuse.forward(sc.concat, &sc.mphi);

    Mat out = sc.y;
    for (int r = 0; r < batch; ++r) {
        const double* g = sc.fused.row(r);
        double* o = out.row(r);
        for (int j = 0; j < dim; ++j) o[j] += std::tanh(params.alpha.get(j)) * g[j];
    }
    if (cache) c.s_out = out;
    return out;
}

Mat contextual_reencode(const Mat& eps, const Mat& meta, PSNetParams& params,
                        PsnetCache* cache) {
    check_shapes(eps, meta, params);
    if (!params.has_reencode()) throw Error("contextual_reencode: path disabled by variant");

    PsnetCache local;
    PsnetCache& c = cache ? *cache : local;
    if (c.phi_m.rows == 0) c.phi_m = project_metadata(meta, params);
    ReencodeCache& rc = c.cr;

    rc.eps_plus = Mat(eps.rows, eps.cols);
    for (size_t i = 0; i < eps.v.size(); ++i) rc.eps_plus.v[i] = eps.v[i] + c.phi_m.v[i];
    affine_forward(rc.eps_plus, params.psi_map, nullptr, rc.psi_out);
    rc.h = layer_norm(rc.psi_out, params.ln_eps, &rc.ln);

    const double gate = sigmoid(params.rho.get(0));
    Mat out = eps;
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += gate * rc.h.v[i];
    if (cache) c.c_out = out;
    return out;
}

Mat psnet_forward(const Mat& eps, const Mat& meta, PSNetParams& params, PsnetCache* cache) {
    check_shapes(eps, meta, params);
    if (params.variant == PsnetVariant::no_psnet) {
        if (cache) {
            cache->eps = &eps;
            cache->meta = &meta;
        }
        return eps;
    }

    PsnetCache local;
    PsnetCache& c = cache ? *cache : local;
    c.eps = &eps;
    c.meta = &meta;
    c.phi_m = project_metadata(meta, params);

    Mat out;
    if (params.has_spectral()) {
        out = spectral_rectify(eps, meta, params, &c);
    } else {
        out = eps;  // the spectral path degenerates to the raw noise passthrough
    }
    if (params.has_reencode()) {
        const Mat c_out = contextual_reencode(eps, meta, params, &c);
        const double e0 = params.eta0.get(0);
        for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += e0 * c_out.v[i];
    }
    const double sg1 = sigmoid(params.eta1.get(0) - 1.0);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += sg1 * c.phi_m.v[i];
    return out;
}

void psnet_backward(const Mat& d_out, PSNetParams& params, PsnetCache& cache) {
    if (params.variant == PsnetVariant::no_psnet) return;
    const Mat& meta = *cache.meta;
    const int dim = params.dim;
    const int rank = params.rank;

    Mat d_phi_m(cache.phi_m.rows, cache.phi_m.cols);

    // residual term: sigmoid(eta1 - 1) * phi(m)
    const double e1 = params.eta1.get(0);
    const double sg1 = sigmoid(e1 - 1.0);
    double d_eta1 = 0.0;
    for (size_t i = 0; i < d_out.v.size(); ++i) {
        d_phi_m.v[i] += sg1 * d_out.v[i];
        d_eta1 += cache.phi_m.v[i] * d_out.v[i];
    }
    params.eta1.grad[0] += d_eta1 * sg1 * (1.0 - sg1);

    if (params.has_reencode()) {
        const double e0 = params.eta0.get(0);
        double d_eta0 = 0.0;
        for (size_t i = 0; i < d_out.v.size(); ++i) d_eta0 += cache.c_out.v[i] * d_out.v[i];
        params.eta0.grad[0] += d_eta0;

        const double gate = sigmoid(params.rho.get(0));
        Mat d_h(d_out.rows, d_out.cols);
        double d_rho = 0.0;
        for (size_t i = 0; i < d_out.v.size(); ++i) {
            const double dc = e0 * d_out.v[i];
            d_h.v[i] = gate * dc;
            d_rho += cache.cr.h.v[i] * dc;
        }
        params.rho.grad[0] += d_rho * gate * (1.0 - gate);

        const Mat d_psi_out = layer_norm_backward(d_h, cache.cr.ln);
        Mat d_eps_plus;
        affine_backward(cache.cr.eps_plus, d_psi_out, params.psi_map, nullptr, &d_eps_plus);
        for (size_t i = 0; i < d_phi_m.v.size(); ++i) d_phi_m.v[i] += d_eps_plus.v[i];
    }

    if (params.has_spectral()) {
        const SpectralCache& sc = cache.sr;
        Mat d_fused(d_out.rows, dim);
        for (int j = 0; j < dim; ++j) {
            const double a = params.alpha.get(j);
            const double th = std::tanh(a);
            double da = 0.0;
            for (int r = 0; r < d_out.rows; ++r) {
                d_fused.at(r, j) = th * d_out.at(r, j);
                da += sc.fused.at(r, j) * d_out.at(r, j);
            }
            params.alpha.grad[j] += da * (1.0 - th * th);
        }
        const Mat d_concat = params.phi_fuse.backward(d_fused, sc.mphi, true);
        Mat d_au(d_out.rows, rank);
        Mat d_av(1, rank);
        Mat d_as(1, rank);
        for (int r = 0; r < d_out.rows; ++r) {
            const double* row = d_concat.row(r);
            for (int j = 0; j < rank; ++j) {
                d_au.at(r, j) = row[j];
                d_av.at(0, j) += row[rank + j];
                d_as.at(0, j) += row[2 * rank + j];
            }
        }
        params.mlp_u.backward(d_au, sc.mu);
        params.mlp_v.backward(d_av, sc.mv);
        params.mlp_s.backward(d_as, sc.ms);
    }

    affine_backward(meta, d_phi_m, params.phi_map, nullptr, nullptr);
}

}  // namespace infodcl
