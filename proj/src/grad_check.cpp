#include "infodcl/grad_check.hpp"

#include <cmath>

namespace infodcl {

GradCheckReport grad_check(const std::function<double(bool)>& loss_fn,
                           const std::vector<ParamTensor*>& params, double delta) {
    if (delta < 1e-6 || delta > 1e-3) {
        throw Error("grad_check: delta must lie in [1e-6, 1e-3]");
    }
    const double base = loss_fn(true);
    if (!std::isfinite(base)) throw NumericError("grad_check: loss not finite at base point");

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const ParamTensor* p : params) analytic.push_back(p->grad);

    GradCheckReport report;
    for (size_t k = 0; k < params.size(); ++k) {
        ParamTensor& p = *params[k];
        for (size_t i = 0; i < p.size(); ++i) {
            const float saved = p.values[i];
            const float hi = static_cast<float>(static_cast<double>(saved) + delta);
            const float lo = static_cast<float>(static_cast<double>(saved) - delta);
            p.values[i] = hi;
            const double f_hi = loss_fn(false);
            p.values[i] = lo;
            const double f_lo = loss_fn(false);
            p.values[i] = saved;
            if (!std::isfinite(f_hi) || !std::isfinite(f_lo)) {
                throw NumericError("grad_check: loss not finite at perturbed point of '" +
                                   p.name + "'");
            }
            // use the realized float32 step, not the requested one
            const double step = static_cast<double>(hi) - static_cast<double>(lo);
            if (step == 0.0) continue;
            const double numeric = (f_hi - f_lo) / step;
            const double a = analytic[k][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
            const double rel = std::fabs(a - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p.name;
                report.worst_index = i;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    // restore analytic gradients for the caller
    for (size_t k = 0; k < params.size(); ++k) params[k]->grad = analytic[k];
    return report;
}

}  // namespace infodcl
