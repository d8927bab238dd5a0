#pragma once

#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/nn.hpp"
#include "infodcl/svd.hpp"

namespace infodcl {

enum class PsnetVariant { full, no_sr, no_cr, no_psnet };

// Learnable state of the informative-noise generator. The variant controls
// which paths exist; a removed path allocates no parameters at all.
struct PSNetParams {
    int dim = 64;
    int rank = 8;
    double ln_eps = 1e-5;
    PsnetVariant variant = PsnetVariant::full;

    // spectral path
    Mlp mlp_u;       // rank -> rank, per-row coefficients
    Mlp mlp_v;       // dim -> rank, shared top right singular vector
    Mlp mlp_s;       // rank -> rank, shared singular values
    Mlp phi_fuse;    // 3*rank -> dim, tanh fusion
    ParamTensor alpha;

    // re-encoding path
    ParamTensor psi_map;  // dim x dim
    ParamTensor rho;      // scalar gate
    ParamTensor eta0;     // scalar weight on the re-encoding output

    // shared
    ParamTensor phi_map;  // dim x dim metadata projection, identity at init
    ParamTensor eta1;     // scalar gate on the metadata residual

    static PSNetParams make(int dim, int rank, PsnetVariant variant, uint64_t seed,
                            double ln_eps = 1e-5);
    void collect_params(std::vector<ParamTensor*>& out);
    bool has_spectral() const {
        return variant == PsnetVariant::full || variant == PsnetVariant::no_cr;
    }
    bool has_reencode() const {
        return variant == PsnetVariant::full || variant == PsnetVariant::no_sr;
    }
};

struct SpectralCache {
    Mat y;
    SVDFactors svd;
    Mat sigma_row;   // 1 x rank input to mlp_s
    Mat vtop_row;    // 1 x dim input to mlp_v
    MlpCache mu, mv, ms, mphi;
    Mat concat;      // batch x 3*rank
    Mat fused;       // batch x dim
};

struct ReencodeCache {
    Mat eps_plus;
    Mat psi_out;
    LayerNormCache ln;
    Mat h;
};

struct PsnetCache {
    Mat phi_m;  // shared metadata projection
    SpectralCache sr;
    ReencodeCache cr;
    Mat s_out;
    Mat c_out;
    const Mat* eps = nullptr;
    const Mat* meta = nullptr;
};

// S(eps, m): factorization of eps + m, branch encodings, fused residual.
// Gradients never flow into eps, m or the factorization itself.
Mat spectral_rectify(const Mat& eps, const Mat& meta, PSNetParams& params,
                     PsnetCache* cache = nullptr);

// C(eps, m): gated layer-normalized re-encoding of eps + phi(m).
Mat contextual_reencode(const Mat& eps, const Mat& meta, PSNetParams& params,
                        PsnetCache* cache = nullptr);

// eps^(m) = S + eta0 * C + sigmoid(eta1 - 1) * phi(m), variant-aware.
Mat psnet_forward(const Mat& eps, const Mat& meta, PSNetParams& params,
                  PsnetCache* cache = nullptr);

// Accumulates gradients into every live PSNet parameter.
void psnet_backward(const Mat& d_out, PSNetParams& params, PsnetCache& cache);

}  // namespace infodcl
