#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "infodcl/grad_check.hpp"
#include "infodcl/psnet.hpp"

using namespace infodcl;

namespace {

PSNetParams make_params(int dim, int rank, PsnetVariant variant = PsnetVariant::full,
                        uint64_t seed = 9) {
    return PSNetParams::make(dim, rank, variant, seed);
}

void randomize(Mat& m, Rng& rng, double scale = 1.0) {
    for (double& x : m.v) x = scale * rng.gaussian();
}

// Straight-line reimplementation of the rectification wiring with plain
// loops: factorize, run the three branch encoders, fuse, apply the gated
// residual. Shares only the factorization routine with the library.
Mat rectify_reference(const Mat& eps, const Mat& meta, PSNetParams& p) {
    const int batch = eps.rows;
    const int dim = p.dim;
    const int rank = p.rank;
    Mat y(batch, dim);
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] = eps.v[i] + meta.v[i];
    const SVDFactors f = truncated_svd(y, std::min({rank, batch, dim}));

    auto run_mlp = [](const Mlp& mlp, const std::vector<double>& in) {
        std::vector<double> cur = in;
        for (const MlpLayer& layer : mlp.layers) {
            std::vector<double> next(layer.out, 0.0);
            for (int o = 0; o < layer.out; ++o) {
                double s = layer.b.get(o);
                for (int i = 0; i < layer.in; ++i) {
                    s += static_cast<double>(layer.w.values[static_cast<size_t>(o) * layer.in + i]) * cur[i];
                }
                if (layer.act == Act::relu && s < 0.0) s = 0.0;
                if (layer.act == Act::tanh_act) s = std::tanh(s);
                next[o] = s;
            }
            cur = std::move(next);
        }
        return cur;
    };

    std::vector<double> vtop(dim), sig(rank, 0.0);
    for (int i = 0; i < dim; ++i) vtop[i] = f.v.at(i, 0);
    for (size_t j = 0; j < f.sigma.size(); ++j) sig[j] = f.sigma[j];
    const std::vector<double> enc_v = run_mlp(p.mlp_v, vtop);
    const std::vector<double> enc_s = run_mlp(p.mlp_s, sig);

    Mat out = y;
    for (int r = 0; r < batch; ++r) {
        std::vector<double> urow(rank, 0.0);
        for (int j = 0; j < std::min(rank, f.u.cols); ++j) urow[j] = f.u.at(r, j);
        const std::vector<double> enc_u = run_mlp(p.mlp_u, urow);
        std::vector<double> concat;
        concat.insert(concat.end(), enc_u.begin(), enc_u.end());
        concat.insert(concat.end(), enc_v.begin(), enc_v.end());
        concat.insert(concat.end(), enc_s.begin(), enc_s.end());
        const std::vector<double> fused = run_mlp(p.phi_fuse, concat);
        for (int d = 0; d < dim; ++d) {
            out.at(r, d) += std::tanh(p.alpha.get(d)) * fused[d];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("zero residual scale reduces rectification to the plain signal") {
    PSNetParams p = make_params(8, 3);
    Rng rng(21);
    Mat eps(5, 8), meta(5, 8);
    randomize(eps, rng);
    randomize(meta, rng, 0.5);
    // alpha is zero-initialized: tanh(0) = 0 kills the fused residual
    const Mat s = spectral_rectify(eps, meta, p);
    for (size_t i = 0; i < s.v.size(); ++i) {
        CHECK(s.v[i] == doctest::Approx(eps.v[i] + meta.v[i]).epsilon(1e-12));
    }
}

TEST_CASE("zero metadata and zero residual leave the raw noise") {
    PSNetParams p = make_params(6, 2);
    Rng rng(3);
    Mat eps(4, 6), meta(4, 6);
    randomize(eps, rng);
    const Mat s = spectral_rectify(eps, meta, p);
    for (size_t i = 0; i < s.v.size(); ++i) CHECK(s.v[i] == doctest::Approx(eps.v[i]));
}

TEST_CASE("rectification matches the straight-line reference with live residuals") {
    PSNetParams p = make_params(8, 2, PsnetVariant::full, 33);
    for (size_t i = 0; i < p.alpha.size(); ++i) p.alpha.values[i] = 0.3f - 0.07f * i;
    Rng rng(90);
    Mat eps(4, 8), meta(4, 8);
    randomize(eps, rng);
    randomize(meta, rng, 0.8);
    const Mat ours = spectral_rectify(eps, meta, p);
    const Mat ref = rectify_reference(eps, meta, p);
    REQUIRE(ours.v.size() == ref.v.size());
    for (size_t i = 0; i < ours.v.size(); ++i) {
        CHECK(ours.v[i] == doctest::Approx(ref.v[i]).epsilon(1e-9));
    }
}

TEST_CASE("closed gate returns the noise unchanged") {
    PSNetParams p = make_params(8, 3);
    p.rho.values[0] = -20.0f;
    Rng rng(14);
    Mat eps(3, 8), meta(3, 8);
    randomize(eps, rng);
    randomize(meta, rng);
    const Mat c = contextual_reencode(eps, meta, p);
    for (size_t i = 0; i < c.v.size(); ++i) {
        CHECK(std::fabs(c.v[i] - eps.v[i]) < 1e-6);
    }
}

TEST_CASE("open gate with identity re-encoding adds the normalized noise") {
    PSNetParams p = make_params(8, 3);
    p.rho.values[0] = 20.0f;
    // psi = identity, phi = 0
    std::fill(p.psi_map.values.begin(), p.psi_map.values.end(), 0.0f);
    std::fill(p.phi_map.values.begin(), p.phi_map.values.end(), 0.0f);
    for (int i = 0; i < 8; ++i) p.psi_map.values[static_cast<size_t>(i) * 8 + i] = 1.0f;
    Rng rng(15);
    Mat eps(3, 8), meta(3, 8);
    randomize(eps, rng);
    randomize(meta, rng);
    const Mat c = contextual_reencode(eps, meta, p);
    const Mat expected = layer_norm(eps, p.ln_eps);
    for (size_t i = 0; i < c.v.size(); ++i) {
        CHECK(std::fabs(c.v[i] - (eps.v[i] + expected.v[i])) < 1e-6);
    }
}

TEST_CASE("re-encoding output is finite with the input shape") {
    PSNetParams p = make_params(12, 4);
    Rng rng(16);
    Mat eps(7, 12), meta(7, 12);
    randomize(eps, rng, 2.0);
    randomize(meta, rng, 2.0);
    const Mat c = contextual_reencode(eps, meta, p);
    CHECK(c.rows == 7);
    CHECK(c.cols == 12);
    CHECK(all_finite(c));
}

TEST_CASE("collapsed gates reduce the full forward to the plain signal") {
    PSNetParams p = make_params(8, 3);
    p.eta0.values[0] = 0.0f;
    p.eta1.values[0] = -20.0f;
    Rng rng(51);
    Mat eps(4, 8), meta(4, 8);
    randomize(eps, rng);
    randomize(meta, rng);
    const Mat out = psnet_forward(eps, meta, p);
    double diff = 0.0;
    for (size_t i = 0; i < out.v.size(); ++i) {
        const double d = out.v[i] - (eps.v[i] + meta.v[i]);
        diff += d * d;
    }
    CHECK(std::sqrt(diff) < 1e-5);
}

TEST_CASE("eta1 at one contributes exactly half the projected metadata") {
    PSNetParams p = make_params(6, 2);
    Rng rng(52);
    Mat eps(3, 6), meta(3, 6);
    randomize(eps, rng);
    randomize(meta, rng);
    PsnetCache cache;
    const Mat full = psnet_forward(eps, meta, p, &cache);
    p.eta1.values[0] = -40.0f;  // switch the residual off
    const Mat without = psnet_forward(eps, meta, p);
    // phi_map is identity at init, so the residual term is 0.5 * meta
    for (size_t i = 0; i < full.v.size(); ++i) {
        CHECK(full.v[i] - without.v[i] == doctest::Approx(0.5 * meta.v[i]).epsilon(1e-6));
    }
}

TEST_CASE("forward equals the sum of its three published components") {
    PSNetParams p = make_params(8, 3, PsnetVariant::full, 63);
    for (size_t i = 0; i < p.alpha.size(); ++i) p.alpha.values[i] = 0.2f;
    p.rho.values[0] = 0.4f;
    p.eta0.values[0] = 0.7f;
    p.eta1.values[0] = 0.3f;
    Rng rng(64);
    Mat eps(5, 8), meta(5, 8);
    randomize(eps, rng);
    randomize(meta, rng);
    const Mat combined = psnet_forward(eps, meta, p);
    const Mat s_term = spectral_rectify(eps, meta, p);
    const Mat c_term = contextual_reencode(eps, meta, p);
    Mat phi_m;
    affine_forward(meta, p.phi_map, nullptr, phi_m);
    const double sg1 = sigmoid(p.eta1.get(0) - 1.0);
    for (size_t i = 0; i < combined.v.size(); ++i) {
        const double expect = s_term.v[i] + p.eta0.get(0) * c_term.v[i] + sg1 * phi_m.v[i];
        CHECK(combined.v[i] == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("forward is deterministic") {
    PSNetParams p = make_params(10, 4, PsnetVariant::full, 70);
    Rng rng(71);
    Mat eps(6, 10), meta(6, 10);
    randomize(eps, rng);
    randomize(meta, rng);
    const Mat a = psnet_forward(eps, meta, p);
    const Mat b = psnet_forward(eps, meta, p);
    CHECK(a.v == b.v);
}

TEST_CASE("disabled-variant forwards omit the removed path") {
    Rng rng(72);
    Mat eps(4, 8), meta(4, 8);
    randomize(eps, rng);
    randomize(meta, rng);

    PSNetParams none = make_params(8, 3, PsnetVariant::no_psnet);
    const Mat raw = psnet_forward(eps, meta, none);
    CHECK(raw.v == eps.v);
    std::vector<ParamTensor*> no_params;
    none.collect_params(no_params);
    CHECK(no_params.empty());

    PSNetParams no_sr = make_params(8, 3, PsnetVariant::no_sr);
    std::vector<ParamTensor*> p1;
    no_sr.collect_params(p1);
    for (ParamTensor* p : p1) {
        CHECK(p->name.find("mlp_u") == std::string::npos);
        CHECK(p->name.find("phi_fuse") == std::string::npos);
        CHECK(p->name.find("alpha") == std::string::npos);
    }
    CHECK_THROWS_AS(spectral_rectify(eps, meta, no_sr), Error);

    PSNetParams no_cr = make_params(8, 3, PsnetVariant::no_cr);
    std::vector<ParamTensor*> p2;
    no_cr.collect_params(p2);
    for (ParamTensor* p : p2) {
        CHECK(p->name.find("psi_map") == std::string::npos);
        CHECK(p->name.find("rho") == std::string::npos);
        CHECK(p->name.find("eta0") == std::string::npos);
    }
    CHECK_THROWS_AS(contextual_reencode(eps, meta, no_cr), Error);
}

TEST_CASE("gradients of a downstream loss match finite differences") {
    const int dim = 6, rank = 2, batch = 4;
    for (PsnetVariant variant :
         {PsnetVariant::full, PsnetVariant::no_sr, PsnetVariant::no_cr}) {
        CAPTURE(static_cast<int>(variant));
        PSNetParams p = make_params(dim, rank, variant, 80);
        if (p.has_spectral()) {
            for (size_t i = 0; i < p.alpha.size(); ++i) {
                p.alpha.values[i] = 0.1f * static_cast<float>(i % 3);
            }
        }
        Rng rng(81);
        Mat eps(batch, dim), meta(batch, dim), target(batch, dim);
        randomize(eps, rng);
        randomize(meta, rng);
        randomize(target, rng);
        std::vector<ParamTensor*> params;
        p.collect_params(params);
        PsnetCache cache;
        auto loss = [&](bool with_grads) {
            const Mat out = psnet_forward(eps, meta, p, with_grads ? &cache : nullptr);
            double l = 0.0;
            Mat d_out(out.rows, out.cols);
            for (size_t i = 0; i < out.v.size(); ++i) {
                const double d = out.v[i] - target.v[i];
                l += d * d;
                d_out.v[i] = 2.0 * d;
            }
            if (with_grads) {
                for (ParamTensor* q : params) q->zero_grad();
                psnet_backward(d_out, p, cache);
            }
            return l;
        };
        const GradCheckReport report = grad_check(loss, params, 1e-5);
        CAPTURE(report.worst_param);
        CHECK(report.max_rel_error < 1e-4);
    }
}
