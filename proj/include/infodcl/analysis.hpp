#pragma once

#include <string>
#include <vector>

#include "infodcl/common.hpp"
#include "infodcl/dataset.hpp"
#include "infodcl/diffusion.hpp"
#include "infodcl/trainer.hpp"

namespace infodcl {

// (mean)^2 / unbiased variance. Errors on fewer than two samples or a
// degenerate (zero-variance) population.
double snr(const std::vector<double>& samples);

struct SNRCurve {
    int num_samples = 0;
    std::vector<double> snr_gaussian;     // index t-1 for t = 1..T
    std::vector<double> snr_informative;
};

// Per timestep, the coordinate-averaged SNR of the noised latent under raw
// gaussian noise versus the model's informative noise, measured over a shared
// sample of items and noise draws (channel 0 of the model).
SNRCurve snr_curve(Model& model, int num_samples, Rng& rng);
std::string snr_curve_csv(const SNRCurve& curve);

// |cosine| between the top right singular vectors of the denoiser input and
// output batches at t = T.
std::vector<double> spectral_similarity(Model& model, int num_batches, int batch_size, Rng& rng,
                                        bool use_reverse_chain = false, int reverse_steps = 20);

struct TheoremRow {
    double x = 0.0;           // k (first report) or kappa (second report)
    double measured = 0.0;
    double reference = 0.0;   // closed form / bound
    bool pass = true;
};

struct TheoremReport {
    std::string theorem_id;
    std::string status;            // "ok" or a violated-hypothesis note
    std::vector<TheoremRow> rows;
    double delta = 0.0;            // <u, g_s>
    double gamma = 0.0;            // estimated Lipschitz factor
    double gamma_spread = 0.0;     // max-min spread of the sampled ratios
    double kappa_star = 0.0;       // closed-form optimum
    double kappa_measured = 0.0;   // grid argmax of the measured bound
    double improvement_star = 0.0;
    bool passed = true;
};
std::string theorem_report_csv(const TheoremReport& report);
std::string theorem_report_text(const TheoremReport& report);

// Compares the explicit down-then-up transport against the closed-form
// translation v_T + kappa * g_s for each step size k, over seeded latents.
TheoremReport verify_theorem_a(const DiffusionSchedule& sched, const std::vector<int>& k_values,
                               const NoisePredictor& pred, const std::vector<double>& cond,
                               double omega_l, double omega_w, int dim, int trials,
                               uint64_t seed, double tolerance = 1e-6);

using GeneratorFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Monte-Carlo check of the expected preference bound for a generator toy:
// improvement(kappa) >= kappa * delta - gamma * kappa^2 * |u| * |g_s|.
TheoremReport verify_theorem_b(const GeneratorFn& generator, const std::vector<double>& u,
                               const std::vector<double>& g_s,
                               const std::vector<double>& kappa_grid, int num_samples,
                               uint64_t seed);

enum class EmbeddingSelector { items, users, generated };
EmbeddingSelector embedding_selector_from(const std::string& s);

// Plain-text matrix export; `generated` runs the generation pass over the
// full catalog (channel 0) with seeded noise.
void export_embeddings(Model& model, EmbeddingSelector which, const std::string& path,
                       uint64_t seed, bool use_reverse_chain = false, int reverse_steps = 20);

// The generation pass used by analysis: noise, informative noise, forward to
// t = T, then either the one-shot prediction or the full reverse chain.
Mat generate_embeddings(Model& model, const std::vector<int>& item_indices, Rng& rng,
                        bool use_reverse_chain = false, int reverse_steps = 20);

}  // namespace infodcl
