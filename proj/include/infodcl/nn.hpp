#pragma once

#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/param_tensor.hpp"

namespace infodcl {

enum class Act { linear, relu, tanh_act };

// y = x * W^T + b, with W stored row-major as [out, in].
void affine_forward(const Mat& x, const ParamTensor& w, const ParamTensor* b, Mat& y);
// Accumulates dW (and db); optionally computes dx.
void affine_backward(const Mat& x, const Mat& dy, ParamTensor& w, ParamTensor* b, Mat* dx);

struct MlpLayer {
    ParamTensor w;
    ParamTensor b;
    Act act = Act::linear;
    int in = 0;
    int out = 0;
};

struct MlpCache {
    std::vector<Mat> inputs;   // input to each layer
    std::vector<Mat> preact;   // pre-activation of each layer
};

// Fixed-architecture multilayer perceptron with manual reverse-mode gradients.
struct Mlp {
    std::vector<MlpLayer> layers;

    static Mlp make(const std::string& name, const std::vector<int>& dims,
                    const std::vector<Act>& acts, uint64_t seed);

    Mat forward(const Mat& x, MlpCache* cache = nullptr) const;
    // Accumulates parameter gradients; returns dL/dinput when requested.
    Mat backward(const Mat& dy, const MlpCache& cache, bool want_input_grad = false);

    void collect_params(std::vector<ParamTensor*>& out);
    int input_dim() const { return layers.front().in; }
    int output_dim() const { return layers.back().out; }
    size_t param_count() const;
};

struct LayerNormCache {
    Mat normalized;                // (x - mu) * inv_std per row
    std::vector<double> inv_std;   // per row; 0 marks the constant-row case
};

// Row-wise layer normalization with population variance. A constant row maps
// to zeros (the zero-variance case is well defined for any eps >= 0).
Mat layer_norm(const Mat& x, double eps, LayerNormCache* cache = nullptr);
std::vector<double> layer_norm(const std::vector<double>& x, double eps);
Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache);

// Sinusoidal position/time embedding of width `dim`.
std::vector<double> time_embedding(double t, int dim);

}  // namespace infodcl
