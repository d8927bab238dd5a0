#include "infodcl/nn.hpp"

#include <cmath>

namespace infodcl {

void affine_forward(const Mat& x, const ParamTensor& w, const ParamTensor* b, Mat& y) {
    const int in = w.shape[1];
    const int out = w.shape[0];
    if (x.cols != in) {
        throw Error("affine_forward: input dim " + std::to_string(x.cols) + " != " +
                    std::to_string(in) + " for '" + w.name + "'");
    }
    y = Mat(x.rows, out);
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (int o = 0; o < out; ++o) {
            const float* wr = w.values.data() + static_cast<size_t>(o) * in;
            double s = b ? b->get(o) : 0.0;
            for (int i = 0; i < in; ++i) s += static_cast<double>(wr[i]) * xr[i];
            yr[o] = s;
        }
    }
}

void affine_backward(const Mat& x, const Mat& dy, ParamTensor& w, ParamTensor* b, Mat* dx) {
    const int in = w.shape[1];
    const int out = w.shape[0];
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        const double* dyr = dy.row(r);
        for (int o = 0; o < out; ++o) {
            const double g = dyr[o];
            if (g == 0.0) continue;
            double* wg = w.grad.data() + static_cast<size_t>(o) * in;
            for (int i = 0; i < in; ++i) wg[i] += g * xr[i];
            if (b) b->grad[o] += g;
        }
    }
    if (dx) {
        *dx = Mat(x.rows, in);
        for (int r = 0; r < x.rows; ++r) {
            const double* dyr = dy.row(r);
            double* dxr = dx->row(r);
            for (int o = 0; o < out; ++o) {
                const double g = dyr[o];
                if (g == 0.0) continue;
                const float* wr = w.values.data() + static_cast<size_t>(o) * in;
                for (int i = 0; i < in; ++i) dxr[i] += g * static_cast<double>(wr[i]);
            }
        }
    }
}

static void apply_activation(Act act, const Mat& pre, Mat& out) {
    out = pre;
    switch (act) {
        case Act::linear:
            break;
        case Act::relu:
            for (double& x : out.v) x = x > 0.0 ? x : 0.0;
            break;
        case Act::tanh_act:
            for (double& x : out.v) x = std::tanh(x);
            break;
    }
}

Mlp Mlp::make(const std::string& name, const std::vector<int>& dims,
              const std::vector<Act>& acts, uint64_t seed) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1) {
        throw Error("Mlp::make: dims/acts mismatch for '" + name + "'");
    }
    Mlp mlp;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.act = acts[l];
        const std::string base = name + ".l" + std::to_string(l);
        layer.w = init_params(base + ".w", {layer.out, layer.in}, InitScheme::xavier,
                              mix_seed(seed, l));
        layer.b = init_params(base + ".b", {layer.out}, InitScheme::zeros);
        mlp.layers.push_back(std::move(layer));
    }
    return mlp;
}

Mat Mlp::forward(const Mat& x, MlpCache* cache) const {
    if (cache) {
        cache->inputs.clear();
        cache->preact.clear();
    }
    Mat cur = x;
    for (const MlpLayer& layer : layers) {
        Mat pre;
        affine_forward(cur, layer.w, &layer.b, pre);
        if (cache) {
            cache->inputs.push_back(std::move(cur));
            cache->preact.push_back(pre);
        }
        Mat post;
        apply_activation(layer.act, pre, post);
        cur = std::move(post);
    }
    return cur;
}

Mat Mlp::backward(const Mat& dy, const MlpCache& cache, bool want_input_grad) {
    Mat dcur = dy;
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
        MlpLayer& layer = layers[l];
        const Mat& pre = cache.preact[l];
        Mat dpre = dcur;
        switch (layer.act) {
            case Act::linear:
                break;
            case Act::relu:
                for (size_t i = 0; i < dpre.v.size(); ++i) {
                    if (pre.v[i] <= 0.0) dpre.v[i] = 0.0;
                }
                break;
            case Act::tanh_act:
                for (size_t i = 0; i < dpre.v.size(); ++i) {
                    const double th = std::tanh(pre.v[i]);
                    dpre.v[i] *= 1.0 - th * th;
                }
                break;
        }
        const bool need_dx = l > 0 || want_input_grad;
        Mat dx;
        affine_backward(cache.inputs[l], dpre, layer.w, &layer.b, need_dx ? &dx : nullptr);
        dcur = std::move(dx);
    }
    return dcur;
}

void Mlp::collect_params(std::vector<ParamTensor*>& out) {
    for (MlpLayer& layer : layers) {
        out.push_back(&layer.w);
        out.push_back(&layer.b);
    }
}

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const MlpLayer& layer : layers) n += layer.w.size() + layer.b.size();
    return n;
}

Mat layer_norm(const Mat& x, double eps, LayerNormCache* cache) {
    if (x.cols < 1) throw Error("layer_norm: empty rows");
    Mat out(x.rows, x.cols);
    if (cache) {
        cache->normalized = Mat(x.rows, x.cols);
        cache->inv_std.assign(x.rows, 0.0);
    }
    const int n = x.cols;
    for (int r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += xr[i];
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = xr[i] - mean;
            var += d * d;
        }
        var /= n;
        const double denom_sq = var + eps;
        double* outr = out.row(r);
        if (denom_sq <= 0.0) {
            // constant row with eps == 0: normalized output is zero
            for (int i = 0; i < n; ++i) outr[i] = 0.0;
            if (cache) {
                for (int i = 0; i < n; ++i) cache->normalized.at(r, i) = 0.0;
            }
            continue;
        }
        const double inv_std = 1.0 / std::sqrt(denom_sq);
        for (int i = 0; i < n; ++i) outr[i] = (xr[i] - mean) * inv_std;
        if (cache) {
            for (int i = 0; i < n; ++i) cache->normalized.at(r, i) = outr[i];
            cache->inv_std[r] = inv_std;
        }
    }
    return out;
}

std::vector<double> layer_norm(const std::vector<double>& x, double eps) {
    Mat m(1, static_cast<int>(x.size()));
    m.v = x;
    Mat out = layer_norm(m, eps);
    return out.v;
}

Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache) {
    const int n = dy.cols;
    Mat dx(dy.rows, dy.cols);
    for (int r = 0; r < dy.rows; ++r) {
        const double inv_std = cache.inv_std[r];
        if (inv_std == 0.0) continue;  // constant-row case: zero gradient
        const double* dyr = dy.row(r);
        const double* xh = cache.normalized.row(r);
        double sum_dy = 0.0;
        double sum_dy_xh = 0.0;
        for (int i = 0; i < n; ++i) {
            sum_dy += dyr[i];
            sum_dy_xh += dyr[i] * xh[i];
        }
        double* dxr = dx.row(r);
        for (int i = 0; i < n; ++i) {
            dxr[i] = inv_std / n * (n * dyr[i] - sum_dy - xh[i] * sum_dy_xh);
        }
    }
    return dx;
}

std::vector<double> time_embedding(double t, int dim) {
    if (dim < 2 || dim % 2 != 0) throw Error("time_embedding: dim must be even and >= 2");
    std::vector<double> emb(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        emb[2 * i] = std::sin(t * freq);
        emb[2 * i + 1] = std::cos(t * freq);
    }
    return emb;
}

}  // namespace infodcl
