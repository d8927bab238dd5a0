#include "infodcl/optimizer.hpp"

#include <cmath>

namespace infodcl {

void OptimizerState::attach(const std::vector<ParamTensor*>& params) {
    first_moment.clear();
    second_moment.clear();
    step_count = 0;
    for (const ParamTensor* p : params) {
        first_moment.emplace_back(p->size(), 0.0f);
        second_moment.emplace_back(p->size(), 0.0f);
    }
}

void optimizer_step(const std::vector<ParamTensor*>& params, OptimizerState& st) {
    if (st.first_moment.size() != params.size()) {
        throw Error("optimizer_step: state not attached to this parameter list");
    }
    for (const ParamTensor* p : params) {
        if (!p->grad_finite()) {
            throw NumericError("optimizer_step: non-finite gradient in '" + p->name + "'");
        }
    }
    st.step_count += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
    for (size_t k = 0; k < params.size(); ++k) {
        ParamTensor& p = *params[k];
        std::vector<float>& m = st.first_moment[k];
        std::vector<float>& v = st.second_moment[k];
        if (m.size() != p.size()) {
            throw Error("optimizer_step: moment size mismatch for '" + p.name + "'");
        }
        for (size_t i = 0; i < p.size(); ++i) {
            double g = p.grad[i];
            double x = p.get(i);
            if (st.kind == OptKind::adam && st.weight_decay != 0.0) {
                g += st.weight_decay * x;  // classic L2-coupled decay
            }
            const double mi = st.beta1 * static_cast<double>(m[i]) + (1.0 - st.beta1) * g;
            const double vi = st.beta2 * static_cast<double>(v[i]) + (1.0 - st.beta2) * g * g;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            const double m_hat = mi / bc1;
            const double v_hat = vi / bc2;
            if (st.kind == OptKind::adamw && st.weight_decay != 0.0) {
                x -= st.learning_rate * st.weight_decay * x;
            }
            x -= st.learning_rate * m_hat / (std::sqrt(v_hat) + st.eps);
            p.set(i, x);
        }
        if (!p.values_finite()) {
            throw NumericError("optimizer_step: non-finite value produced in '" + p.name + "'");
        }
    }
}

}  // namespace infodcl
