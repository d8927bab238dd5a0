#include "infodcl/diffusion.hpp"

#include <algorithm>
#include <cmath>

namespace infodcl {

void DiffusionSchedule::check_t(int t) const {
    if (t < 0 || t > steps) {
        throw Error("diffusion: timestep " + std::to_string(t) + " outside [0, " +
                    std::to_string(steps) + "]");
    }
}

DiffusionSchedule build_schedule(int steps, double beta_first, double beta_last) {
    if (steps < 1) throw ConfigError("build_schedule: steps must be >= 1");
    if (!(beta_first > 0.0) || !(beta_first <= beta_last) || !(beta_last < 1.0)) {
        throw ConfigError("build_schedule: need 0 < beta_first <= beta_last < 1");
    }
    DiffusionSchedule sched;
    sched.steps = steps;
    sched.beta.assign(steps + 1, 0.0);
    sched.alpha.assign(steps + 1, 1.0);
    sched.alpha_bar.assign(steps + 1, 1.0);
    sched.a.assign(steps + 1, 1.0);
    sched.s.assign(steps + 1, 0.0);
    for (int t = 1; t <= steps; ++t) {
        const double frac = steps > 1 ? static_cast<double>(t - 1) / (steps - 1) : 0.0;
        sched.beta[t] = beta_first + (beta_last - beta_first) * frac;
        sched.alpha[t] = 1.0 - sched.beta[t];
        sched.alpha_bar[t] = sched.alpha_bar[t - 1] * sched.alpha[t];
        sched.a[t] = std::sqrt(sched.alpha_bar[t]);
        sched.s[t] = std::sqrt(1.0 - sched.alpha_bar[t]);
    }
    return sched;
}

std::vector<double> forward_diffuse(const std::vector<double>& e,
                                    const std::vector<double>& eps, int t,
                                    const DiffusionSchedule& sched) {
    sched.check_t(t);
    if (e.size() != eps.size()) throw Error("forward_diffuse: shape mismatch");
    std::vector<double> z(e.size());
    const double at = sched.a[t];
    const double st = sched.s[t];
    for (size_t i = 0; i < e.size(); ++i) z[i] = at * e[i] + st * eps[i];
    return z;
}

Mat forward_diffuse(const Mat& e, const Mat& eps, int t, const DiffusionSchedule& sched) {
    sched.check_t(t);
    if (e.rows != eps.rows || e.cols != eps.cols) throw Error("forward_diffuse: shape mismatch");
    Mat z(e.rows, e.cols);
    const double at = sched.a[t];
    const double st = sched.s[t];
    for (size_t i = 0; i < e.v.size(); ++i) z.v[i] = at * e.v[i] + st * eps.v[i];
    return z;
}

DenoiserParams DenoiserParams::make(int dim, int hidden, int time_dim, uint64_t seed) {
    DenoiserParams p;
    p.dim = dim;
    p.time_dim = time_dim;
    p.mlp = Mlp::make("denoiser", {dim + time_dim, hidden, dim}, {Act::relu, Act::linear}, seed);
    return p;
}

void DenoiserParams::collect_params(std::vector<ParamTensor*>& out) {
    mlp.collect_params(out);
}

Mat denoise_predict(const Mat& z, int t, const DenoiserParams& params, DenoiserCache* cache) {
    if (z.cols != params.dim) throw Error("denoise_predict: latent dim mismatch");
    const std::vector<double> temb = time_embedding(static_cast<double>(t), params.time_dim);
    Mat input(z.rows, params.dim + params.time_dim);
    for (int r = 0; r < z.rows; ++r) {
        double* row = input.row(r);
        const double* zr = z.row(r);
        std::copy(zr, zr + params.dim, row);
        std::copy(temb.begin(), temb.end(), row + params.dim);
    }
    DenoiserCache local;
    DenoiserCache& c = cache ? *cache : local;
    c.input = std::move(input);
    return params.mlp.forward(c.input, &c.mlp_cache);
}

Mat denoiser_backward(const Mat& d_pred, DenoiserParams& params, DenoiserCache& cache) {
    const Mat d_input = params.mlp.backward(d_pred, cache.mlp_cache, true);
    Mat d_z(d_input.rows, params.dim);
    for (int r = 0; r < d_input.rows; ++r) {
        const double* src = d_input.row(r);
        std::copy(src, src + params.dim, d_z.row(r));
    }
    return d_z;
}

double reconstruction_loss(const Mat& e, const Mat& pred) {
    if (e.rows != pred.rows || e.cols != pred.cols) {
        throw Error("reconstruction_loss: shape mismatch");
    }
    double loss = 0.0;
    for (size_t i = 0; i < e.v.size(); ++i) {
        const double d = e.v[i] - pred.v[i];
        loss += d * d;
    }
    return loss;
}

namespace {

std::vector<double> guided_prediction(const NoisePredictor& pred, const std::vector<double>& v,
                                      double t, const std::vector<double>* cond, double omega) {
    if (!cond) return pred(v, t, nullptr);
    const std::vector<double> with_cond = pred(v, t, cond);
    if (omega == 0.0) return with_cond;
    const std::vector<double> without = pred(v, t, nullptr);
    std::vector<double> out(with_cond.size());
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 + omega) * with_cond[i] - omega * without[i];
    }
    return out;
}

}  // namespace

std::vector<double> ddim_transport(const std::vector<double>& v, int t_from, int t_to,
                                   const NoisePredictor& pred,
                                   const std::vector<double>* cond, double omega,
                                   const DiffusionSchedule& sched) {
    sched.check_t(t_from);
    sched.check_t(t_to);
    if (t_from == t_to) throw Error("ddim_transport: t_from == t_to");
    const double a_from = sched.a[t_from];
    const double a_to = sched.a[t_to];
    const double s_from = sched.s[t_from];
    const double s_to = sched.s[t_to];
    if (a_from == 0.0) throw NumericError("ddim_transport: a_from is zero");
    const std::vector<double> eps_hat =
        guided_prediction(pred, v, static_cast<double>(t_from), cond, omega);
    if (eps_hat.size() != v.size()) throw Error("ddim_transport: predictor shape mismatch");
    std::vector<double> out(v.size());
    const double ratio = a_to / a_from;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = ratio * (v[i] - s_from * eps_hat[i]) + s_to * eps_hat[i];
    }
    return out;
}

std::vector<double> semantic_gradient(const NoisePredictor& pred, const std::vector<double>& v,
                                      double t, const std::vector<double>& cond) {
    const std::vector<double> with_cond = pred(v, t, &cond);
    const std::vector<double> without = pred(v, t, nullptr);
    if (with_cond.size() != without.size()) {
        throw Error("semantic_gradient: predictor shape mismatch");
    }
    std::vector<double> g(with_cond.size());
    for (size_t i = 0; i < g.size(); ++i) g[i] = with_cond[i] - without[i];
    return g;
}

double closed_form_shift_scale(double a_hi, double s_hi, double a_lo, double s_lo,
                               double omega_delta) {
    if (a_lo == 0.0) throw NumericError("closed_form_shift_scale: a at the lower step is zero");
    return omega_delta * (a_hi * s_lo - a_lo * s_hi) / a_lo;
}

std::vector<double> informative_noise_closed_form(const std::vector<double>& v_T,
                                                  const std::vector<double>& g_s,
                                                  const DiffusionSchedule& sched, int k,
                                                  double omega_l, double omega_w) {
    if (k < 1 || sched.steps - k < 0) {
        throw Error("informative_noise_closed_form: step size out of range");
    }
    if (v_T.size() != g_s.size()) throw Error("informative_noise_closed_form: shape mismatch");
    const int hi = sched.steps;
    const int lo = sched.steps - k;
    const double kappa = closed_form_shift_scale(sched.a[hi], sched.s[hi], sched.a[lo],
                                                 sched.s[lo], omega_l - omega_w);
    std::vector<double> out(v_T.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = v_T[i] + kappa * g_s[i];
    return out;
}

Mat reverse_chain(const Mat& z_T, const DenoiserParams& params, const DiffusionSchedule& sched,
                  int num_steps) {
    if (num_steps < 1) throw Error("reverse_chain: need at least one step");
    Mat z = z_T;
    int t = sched.steps;
    const int stride = std::max(1, sched.steps / num_steps);
    while (t > 0) {
        const int t_next = std::max(0, t - stride);
        const Mat x0 = denoise_predict(z, t, params);
        // implied noise from the clean prediction, then the deterministic hop
        const double at = sched.a[t];
        const double st = sched.s[t];
        const double an = sched.a[t_next];
        const double sn = sched.s[t_next];
        for (int r = 0; r < z.rows; ++r) {
            double* zr = z.row(r);
            const double* xr = x0.row(r);
            for (int c = 0; c < z.cols; ++c) {
                const double eps_hat = st > 0.0 ? (zr[c] - at * xr[c]) / st : 0.0;
                zr[c] = an * xr[c] + sn * eps_hat;
            }
        }
        t = t_next;
    }
    return z;
}

}  // namespace infodcl
