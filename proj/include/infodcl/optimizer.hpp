#pragma once

#include <vector>

#include "infodcl/param_tensor.hpp"

namespace infodcl {

enum class OptKind { adam, adamw };

struct OptimizerState {
    OptKind kind = OptKind::adam;
    long step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    // per-parameter moment buffers, parallel to the attached parameter list
    std::vector<std::vector<float>> first_moment;
    std::vector<std::vector<float>> second_moment;

    void attach(const std::vector<ParamTensor*>& params);
    bool attached() const { return !first_moment.empty(); }
};

// Bias-corrected Adam / AdamW update over the full parameter list. AdamW
// applies decoupled weight decay; Adam folds weight decay into the gradient.
// Throws NumericError naming the parameter if a gradient is non-finite.
void optimizer_step(const std::vector<ParamTensor*>& params, OptimizerState& st);

}  // namespace infodcl
