#include "infodcl/param_tensor.hpp"

#include <cmath>

namespace infodcl {

bool ParamTensor::values_finite() const {
    for (float x : values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool ParamTensor::grad_finite() const {
    for (double x : grad) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

ParamTensor init_params(const std::string& name, const std::vector<int>& shape,
                        InitScheme scheme, uint64_t seed, double constant_value) {
    if (shape.empty()) throw Error("init_params: empty shape for '" + name + "'");
    size_t total = 1;
    for (int d : shape) {
        if (d < 1) throw Error("init_params: non-positive dimension in shape of '" + name + "'");
        total *= static_cast<size_t>(d);
    }
    ParamTensor t;
    t.name = name;
    t.shape = shape;
    t.values.assign(total, 0.0f);
    t.grad.assign(total, 0.0);
    switch (scheme) {
        case InitScheme::zeros:
            break;
        case InitScheme::constant:
            std::fill(t.values.begin(), t.values.end(), static_cast<float>(constant_value));
            break;
        case InitScheme::xavier: {
            const int fan_in = shape.back();
            const int fan_out = shape.front();
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            Rng rng(seed);
            for (float& x : t.values) x = static_cast<float>(rng.uniform(-bound, bound));
            break;
        }
    }
    return t;
}

ParamTensor init_identity(const std::string& name, int n) {
    ParamTensor t = init_params(name, {n, n}, InitScheme::zeros);
    for (int i = 0; i < n; ++i) t.values[static_cast<size_t>(i) * n + i] = 1.0f;
    return t;
}

}  // namespace infodcl
