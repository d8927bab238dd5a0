#include "infodcl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "infodcl/svd.hpp"

namespace infodcl {

double snr(const std::vector<double>& samples) {
    if (samples.size() < 2) throw NumericError("snr: need at least two samples");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        var += d * d;
    }
    var /= static_cast<double>(samples.size() - 1);
    if (var <= 0.0) throw NumericError("snr: degenerate sample (zero variance)");
    return mean * mean / var;
}

namespace {

// coordinate-wise SNR over the rows of a batch, averaged across coordinates
double matrix_snr(const Mat& m) {
    double acc = 0.0;
    int used = 0;
    std::vector<double> column(m.rows);
    for (int c = 0; c < m.cols; ++c) {
        for (int r = 0; r < m.rows; ++r) column[r] = m.at(r, c);
        double mean = 0.0;
        for (double x : column) mean += x;
        mean /= column.size();
        double var = 0.0;
        for (double x : column) var += (x - mean) * (x - mean);
        var /= static_cast<double>(column.size() - 1);
        if (var <= 1e-300) continue;
        acc += mean * mean / var;
        ++used;
    }
    return used > 0 ? acc / used : 0.0;
}

}  // namespace

SNRCurve snr_curve(Model& model, int num_samples, Rng& rng) {
    if (model.channels.empty()) throw Error("snr_curve: model has no channels");
    if (num_samples < 2) throw Error("snr_curve: need at least two samples");
    const int dim = model.cfg.dim;
    Channel& ch = model.channels.front();

    std::vector<int> items(num_samples);
    for (int i = 0; i < num_samples; ++i) items[i] = rng.uniform_int(model.num_items());
    Mat e(num_samples, dim), meta(num_samples, dim), eps(num_samples, dim);
    for (int i = 0; i < num_samples; ++i) {
        for (int d = 0; d < dim; ++d) {
            e.at(i, d) = model.item_emb.get(static_cast<size_t>(items[i]) * dim + d);
            meta.at(i, d) = ch.metadata.at(items[i], d);
        }
    }
    rng.fill_gaussian(eps);
    const Mat eps_info = psnet_forward(eps, meta, ch.psnet);

    SNRCurve curve;
    curve.num_samples = num_samples;
    for (int t = 1; t <= model.schedule.steps; ++t) {
        const Mat z_gauss = forward_diffuse(e, eps, t, model.schedule);
        const Mat z_info = forward_diffuse(e, eps_info, t, model.schedule);
        curve.snr_gaussian.push_back(matrix_snr(z_gauss));
        curve.snr_informative.push_back(matrix_snr(z_info));
    }
    return curve;
}

std::string snr_curve_csv(const SNRCurve& curve) {
    std::ostringstream out;
    out.precision(10);
    out << "t,snr_gaussian,snr_informative\n";
    for (size_t i = 0; i < curve.snr_gaussian.size(); ++i) {
        out << (i + 1) << ',' << curve.snr_gaussian[i] << ',' << curve.snr_informative[i] << '\n';
    }
    return out.str();
}

Mat generate_embeddings(Model& model, const std::vector<int>& item_indices, Rng& rng,
                        bool use_reverse_chain, int reverse_steps) {
    if (model.channels.empty()) throw Error("generate_embeddings: model has no channels");
    Channel& ch = model.channels.front();
    const int dim = model.cfg.dim;
    const int n = static_cast<int>(item_indices.size());
    Mat e(n, dim), meta(n, dim), eps(n, dim);
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) {
            e.at(i, d) = model.item_emb.get(static_cast<size_t>(item_indices[i]) * dim + d);
            meta.at(i, d) = ch.metadata.at(item_indices[i], d);
        }
    }
    rng.fill_gaussian(eps);
    const Mat eps_info = psnet_forward(eps, meta, ch.psnet);
    const int t = model.schedule.steps;
    const Mat z = forward_diffuse(e, eps_info, t, model.schedule);
    if (use_reverse_chain) {
        return reverse_chain(z, ch.denoiser, model.schedule, reverse_steps);
    }
    return denoise_predict(z, t, ch.denoiser);
}

std::vector<double> spectral_similarity(Model& model, int num_batches, int batch_size, Rng& rng,
                                        bool use_reverse_chain, int reverse_steps) {
    if (model.channels.empty()) throw Error("spectral_similarity: model has no channels");
    if (batch_size < 2) throw Error("spectral_similarity: batch size must be >= 2");
    Channel& ch = model.channels.front();
    const int dim = model.cfg.dim;
    std::vector<double> cosines;
    for (int b = 0; b < num_batches; ++b) {
        std::vector<int> items(batch_size);
        for (int i = 0; i < batch_size; ++i) items[i] = rng.uniform_int(model.num_items());
        Mat e(batch_size, dim), meta(batch_size, dim), eps(batch_size, dim);
        for (int i = 0; i < batch_size; ++i) {
            for (int d = 0; d < dim; ++d) {
                e.at(i, d) = model.item_emb.get(static_cast<size_t>(items[i]) * dim + d);
                meta.at(i, d) = ch.metadata.at(items[i], d);
            }
        }
        rng.fill_gaussian(eps);
        const Mat eps_info = psnet_forward(eps, meta, ch.psnet);
        const int t = model.schedule.steps;
        const Mat z = forward_diffuse(e, eps_info, t, model.schedule);
        const Mat out = use_reverse_chain
                            ? reverse_chain(z, ch.denoiser, model.schedule, reverse_steps)
                            : denoise_predict(z, t, ch.denoiser);
        const std::vector<double> v_in = truncated_svd(z, 1).top_right_singular_vector();
        const std::vector<double> v_out = truncated_svd(out, 1).top_right_singular_vector();
        cosines.push_back(std::fabs(dot(v_in.data(), v_out.data(), dim)));
    }
    return cosines;
}

std::string theorem_report_csv(const TheoremReport& report) {
    std::ostringstream out;
    out.precision(10);
    if (report.theorem_id == "a") {
        out << "k,deviation,kappa\n";
    } else {
        out << "kappa,improvement,bound\n";
    }
    for (const TheoremRow& r : report.rows) {
        out << r.x << ',' << r.measured << ',' << r.reference << '\n';
    }
    return out.str();
}

std::string theorem_report_text(const TheoremReport& report) {
    std::ostringstream out;
    out.precision(10);
    out << "theorem = " << report.theorem_id << '\n';
    out << "status = " << report.status << '\n';
    out << "passed = " << (report.passed ? "yes" : "no") << '\n';
    if (report.theorem_id == "b") {
        out << "delta = " << report.delta << '\n';
        out << "gamma = " << report.gamma << '\n';
        out << "gamma_spread = " << report.gamma_spread << '\n';
        out << "kappa_star = " << report.kappa_star << '\n';
        out << "kappa_measured = " << report.kappa_measured << '\n';
        out << "improvement_star = " << report.improvement_star << '\n';
    }
    return out.str();
}

TheoremReport verify_theorem_a(const DiffusionSchedule& sched, const std::vector<int>& k_values,
                               const NoisePredictor& pred, const std::vector<double>& cond,
                               double omega_l, double omega_w, int dim, int trials,
                               uint64_t seed, double tolerance) {
    TheoremReport report;
    report.theorem_id = "a";
    report.status = "ok";
    for (int k : k_values) {
        if (k < 1 || sched.steps - k < 0) throw Error("verify_theorem_a: bad step size");
        double max_dev = 0.0;
        Rng rng(mix_seed(seed, static_cast<uint64_t>(k)));
        for (int trial = 0; trial < trials; ++trial) {
            std::vector<double> v_T(dim);
            for (double& x : v_T) x = rng.gaussian();
            const std::vector<double> down =
                ddim_transport(v_T, sched.steps, sched.steps - k, pred, &cond, omega_l, sched);
            const std::vector<double> up =
                ddim_transport(down, sched.steps - k, sched.steps, pred, &cond, omega_w, sched);
            const double t_mid = sched.steps - 0.5 * k;
            const std::vector<double> g_s = semantic_gradient(pred, v_T, t_mid, cond);
            const std::vector<double> closed =
                informative_noise_closed_form(v_T, g_s, sched, k, omega_l, omega_w);
            double dev = 0.0;
            for (int i = 0; i < dim; ++i) dev += (up[i] - closed[i]) * (up[i] - closed[i]);
            max_dev = std::max(max_dev, std::sqrt(dev));
        }
        TheoremRow row;
        row.x = k;
        row.measured = max_dev;
        row.reference = closed_form_shift_scale(sched.a[sched.steps], sched.s[sched.steps],
                                                sched.a[sched.steps - k], sched.s[sched.steps - k],
                                                omega_l - omega_w);
        row.pass = max_dev < tolerance;
        report.rows.push_back(row);
    }
    // Either the deviation is tolerance-exact (constant predictors), or it has
    // to shrink with the step size (smooth predictors).
    bool all_exact = true;
    for (const TheoremRow& r : report.rows) all_exact = all_exact && r.pass;
    std::vector<TheoremRow> sorted = report.rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const TheoremRow& a, const TheoremRow& b) { return a.x > b.x; });
    bool shrinking = sorted.size() >= 2;
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        shrinking = shrinking && sorted[i + 1].measured < sorted[i].measured;
    }
    report.passed = all_exact || shrinking;
    return report;
}

TheoremReport verify_theorem_b(const GeneratorFn& generator, const std::vector<double>& u,
                               const std::vector<double>& g_s,
                               const std::vector<double>& kappa_grid, int num_samples,
                               uint64_t seed) {
    TheoremReport report;
    report.theorem_id = "b";
    const int dim = static_cast<int>(u.size());
    if (g_s.size() != u.size()) throw Error("verify_theorem_b: shape mismatch");

    report.delta = dot(u.data(), g_s.data(), dim);
    if (report.delta <= 0.0) {
        report.status = "alignment hypothesis violated (delta <= 0); no pass/fail verdict";
        report.passed = false;
        return report;
    }
    const double u_norm = std::sqrt(dot(u.data(), u.data(), dim));
    const double g_norm = std::sqrt(dot(g_s.data(), g_s.data(), dim));

    // Lipschitz factor: max finite-difference ratio over sampled pairs
    Rng grng(mix_seed(seed, 0xabc));
    double gamma_max = 0.0;
    double gamma_min = 1e300;
    const int pairs = 10000;
    std::vector<double> x(dim), y(dim);
    for (int p = 0; p < pairs; ++p) {
        for (int i = 0; i < dim; ++i) {
            x[i] = grng.gaussian();
            y[i] = grng.gaussian();
        }
        const std::vector<double> gx = generator(x);
        const std::vector<double> gy = generator(y);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < dim; ++i) {
            num += (gx[i] - gy[i]) * (gx[i] - gy[i]);
            den += (x[i] - y[i]) * (x[i] - y[i]);
        }
        if (den <= 0.0) continue;
        const double ratio = std::sqrt(num / den);
        gamma_max = std::max(gamma_max, ratio);
        gamma_min = std::min(gamma_min, ratio);
    }
    report.gamma = gamma_max;
    report.gamma_spread = gamma_max - gamma_min;
    report.kappa_star = report.delta / (2.0 * report.gamma * u_norm * g_norm);
    report.improvement_star =
        report.delta * report.delta / (4.0 * report.gamma * u_norm * g_norm);

    // paired Monte-Carlo estimate of the expected improvement per kappa
    Rng rng(mix_seed(seed, 0xdef));
    std::vector<std::vector<double>> latents(num_samples, std::vector<double>(dim));
    for (auto& v : latents) {
        for (double& xi : v) xi = rng.gaussian();
    }
    std::vector<double> base_scores(num_samples);
    for (int s = 0; s < num_samples; ++s) {
        const std::vector<double> g0 = generator(latents[s]);
        base_scores[s] = dot(u.data(), g0.data(), dim);
    }

    double best_bound = -1e300;
    double best_kappa = 0.0;
    report.passed = true;
    std::vector<double> shifted(dim);
    for (double kappa : kappa_grid) {
        double improvement = 0.0;
        for (int s = 0; s < num_samples; ++s) {
            for (int i = 0; i < dim; ++i) shifted[i] = latents[s][i] + kappa * g_s[i];
            const std::vector<double> gk = generator(shifted);
            improvement += dot(u.data(), gk.data(), dim) - base_scores[s];
        }
        improvement /= num_samples;
        const double bound =
            kappa * report.delta - report.gamma * kappa * kappa * u_norm * g_norm;
        TheoremRow row;
        row.x = kappa;
        row.measured = improvement;
        row.reference = bound;
        row.pass = improvement >= bound - 1e-9 * (1.0 + std::fabs(bound));
        report.passed = report.passed && row.pass;
        report.rows.push_back(row);
        if (bound > best_bound) {
            best_bound = bound;
            best_kappa = kappa;
        }
    }
    report.kappa_measured = best_kappa;
    report.status = "ok";
    return report;
}

EmbeddingSelector embedding_selector_from(const std::string& s) {
    if (s == "items") return EmbeddingSelector::items;
    if (s == "users") return EmbeddingSelector::users;
    if (s == "generated") return EmbeddingSelector::generated;
    throw ConfigError("unknown embedding selector '" + s + "' (items|users|generated)");
}

void export_embeddings(Model& model, EmbeddingSelector which, const std::string& path,
                       uint64_t seed, bool use_reverse_chain, int reverse_steps) {
    Mat out;
    switch (which) {
        case EmbeddingSelector::items:
            out = model.item_mat();
            break;
        case EmbeddingSelector::users:
            out = model.user_mat();
            break;
        case EmbeddingSelector::generated: {
            std::vector<int> all(model.num_items());
            for (int i = 0; i < model.num_items(); ++i) all[i] = i;
            Rng rng(mix_seed(seed, 0x9e11));
            out = generate_embeddings(model, all, rng, use_reverse_chain, reverse_steps);
            break;
        }
    }
    std::ofstream f(path);
    if (!f) throw DataError("export_embeddings: cannot write '" + path + "'");
    f.precision(17);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            if (c) f << ' ';
            f << out.at(r, c);
        }
        f << '\n';
    }
}

}  // namespace infodcl
