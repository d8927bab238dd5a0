#pragma once

#include <string>
#include <vector>

#include "infodcl/common.hpp"

namespace infodcl {

// A named learnable array. Values are stored in float32 (the checkpoint
// payload format); gradients accumulate in float64.
struct ParamTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
    std::vector<double> grad;

    size_t size() const { return values.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
    bool values_finite() const;
    bool grad_finite() const;

    double get(size_t i) const { return static_cast<double>(values[i]); }
    void set(size_t i, double x) { values[i] = static_cast<float>(x); }
};

enum class InitScheme { xavier, zeros, constant };

// Xavier draws uniform in +/- sqrt(6 / (fan_in + fan_out)); fans are the
// first and last dimensions of the shape. Deterministic under `seed`.
ParamTensor init_params(const std::string& name, const std::vector<int>& shape,
                        InitScheme scheme, uint64_t seed = 0, double constant_value = 0.0);

// Square identity matrix parameter (used for maps initialized to a pass-through).
ParamTensor init_identity(const std::string& name, int n);

}  // namespace infodcl
