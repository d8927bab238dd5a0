#pragma once

#include <functional>
#include <string>
#include <vector>

#include "infodcl/param_tensor.hpp"

namespace infodcl {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_param;
    size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Compares reverse-mode gradients against central finite differences,
// coordinate by coordinate.
//
// `loss_fn(true)` must zero and repopulate every gradient buffer and return
// the loss; `loss_fn(false)` must return the loss without touching gradients.
// The function has to be deterministic (fix any sampled inputs up front).
// Relative error uses a small absolute floor so exactly-zero gradients do not
// blow up on finite-difference rounding noise.
GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<ParamTensor*>& params, double delta);

}  // namespace infodcl
