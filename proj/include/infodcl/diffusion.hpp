#pragma once

#include <functional>
#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/nn.hpp"

namespace infodcl {

// Variance-preserving noise schedule. Index t runs 0..steps with
// alpha_bar[0] = 1; a[t]^2 + s[t]^2 = 1 for every t.
struct DiffusionSchedule {
    int steps = 0;
    std::vector<double> beta;       // beta[0] unused
    std::vector<double> alpha;      // 1 - beta
    std::vector<double> alpha_bar;  // running product
    std::vector<double> a;          // sqrt(alpha_bar)
    std::vector<double> s;          // sqrt(1 - alpha_bar)

    void check_t(int t) const;
};

DiffusionSchedule build_schedule(int steps, double beta_first, double beta_last);

// z_t = a_t * e + s_t * eps. t = 0 returns e unchanged.
std::vector<double> forward_diffuse(const std::vector<double>& e,
                                    const std::vector<double>& eps, int t,
                                    const DiffusionSchedule& sched);
Mat forward_diffuse(const Mat& e, const Mat& eps, int t, const DiffusionSchedule& sched);

// Clean-embedding predictor: MLP over [z_t || time_embedding(t)].
struct DenoiserParams {
    Mlp mlp;
    int dim = 0;
    int time_dim = 16;

    static DenoiserParams make(int dim, int hidden, int time_dim, uint64_t seed);
    void collect_params(std::vector<ParamTensor*>& out);
};

struct DenoiserCache {
    Mat input;
    MlpCache mlp_cache;
};

Mat denoise_predict(const Mat& z, int t, const DenoiserParams& params,
                    DenoiserCache* cache = nullptr);
// Returns dL/dz (the time-embedding slice is discarded).
Mat denoiser_backward(const Mat& d_pred, DenoiserParams& params, DenoiserCache& cache);

// sum over the batch of squared distances between rows
double reconstruction_loss(const Mat& e, const Mat& pred);

// Noise predictor interface for the deterministic transport analysis:
// cond == nullptr means unconditional.
using NoisePredictor = std::function<std::vector<double>(
    const std::vector<double>& v, double t, const std::vector<double>* cond)>;

// Deterministic latent update between two timesteps; the same algebra runs
// forward (t_to < t_from) and as inversion (t_to > t_from). With a condition,
// the prediction follows the guidance rule
// (1 + omega) * eps(v, t | cond) - omega * eps(v, t | none).
std::vector<double> ddim_transport(const std::vector<double>& v, int t_from, int t_to,
                                   const NoisePredictor& pred,
                                   const std::vector<double>* cond, double omega,
                                   const DiffusionSchedule& sched);

// Difference between the conditional and unconditional predictions.
std::vector<double> semantic_gradient(const NoisePredictor& pred, const std::vector<double>& v,
                                      double t, const std::vector<double>& cond);

// kappa = omega_delta * (a_hi * s_lo - a_lo * s_hi) / a_lo
double closed_form_shift_scale(double a_hi, double s_hi, double a_lo, double s_lo,
                               double omega_delta);

// v'_T = v_T + kappa * g_s for one down-up round with step k.
std::vector<double> informative_noise_closed_form(const std::vector<double>& v_T,
                                                  const std::vector<double>& g_s,
                                                  const DiffusionSchedule& sched, int k,
                                                  double omega_l, double omega_w);

// Full deterministic reverse chain driven by the clean-embedding denoiser.
Mat reverse_chain(const Mat& z_T, const DenoiserParams& params, const DiffusionSchedule& sched,
                  int num_steps);

}  // namespace infodcl
