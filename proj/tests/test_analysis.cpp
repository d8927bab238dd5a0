#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "infodcl/analysis.hpp"
#include "infodcl/synthetic.hpp"
#include "oracle_helpers.hpp"

using namespace infodcl;
namespace fs = std::filesystem;

namespace {

Model toy_model(Variant variant = Variant::full, uint64_t seed = 5, int items = 40) {
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.svd_rank = 3;
    cfg.diffusion_steps = 25;
    cfg.batch = 32;
    cfg.seed = seed;
    cfg.variant = variant;
    cfg.num_channels = 1;
    std::vector<Mat> meta;
    meta.emplace_back(items, cfg.dim);
    Rng rng(seed);
    for (double& x : meta[0].v) x = 0.4 * rng.gaussian();
    return Model::build(cfg, 20, items, std::move(meta));
}

}  // namespace

TEST_CASE("snr of a centered gaussian is near zero") {
    Rng rng(1);
    std::vector<double> xs(1000000);
    for (double& x : xs) x = rng.gaussian();
    CHECK(snr(xs) < 0.01);
}

TEST_CASE("snr of a shifted gaussian approaches mean squared over variance") {
    Rng rng(2);
    std::vector<double> xs(1000000);
    for (double& x : xs) x = 2.0 + rng.gaussian();
    CHECK(snr(xs) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("degenerate samples raise an error") {
    CHECK_THROWS_AS(snr({1.0, 1.0, 1.0}), NumericError);
    CHECK_THROWS_AS(snr({1.0}), NumericError);
}

TEST_CASE("snr matches a two-pass oracle") {
    Rng rng(3);
    std::vector<double> xs(501);
    for (double& x : xs) x = 3.0 * rng.gaussian() - 1.0;
    double mean = 0.0, var = 0.0;
    oracle::two_pass_stats(xs, mean, var);
    CHECK(snr(xs) == doctest::Approx(mean * mean / var).epsilon(1e-9));
}

TEST_CASE("near-identity noise generator makes the curves coincide") {
    Model model = toy_model();
    // collapse the generator to a passthrough: zero metadata, closed gates
    Channel& ch = model.channels[0];
    for (double& x : ch.metadata.v) x = 0.0;
    ch.psnet.eta0.values[0] = 0.0f;
    ch.psnet.eta1.values[0] = -20.0f;
    Rng rng(9);
    const SNRCurve curve = snr_curve(model, 400, rng);
    REQUIRE(curve.snr_gaussian.size() == static_cast<size_t>(model.schedule.steps));
    for (size_t t = 0; t < curve.snr_gaussian.size(); ++t) {
        const double gap = std::fabs(curve.snr_informative[t] - curve.snr_gaussian[t]);
        const double scale = std::max(1e-12, std::fabs(curve.snr_gaussian[t]));
        CHECK(gap / scale < 0.10);
    }
}

TEST_CASE("snr curve has one entry per timestep and a csv header") {
    Model model = toy_model();
    Rng rng(11);
    const SNRCurve curve = snr_curve(model, 64, rng);
    CHECK(curve.snr_informative.size() == static_cast<size_t>(model.schedule.steps));
    const std::string csv = snr_curve_csv(curve);
    CHECK(csv.rfind("t,snr_gaussian,snr_informative", 0) == 0);
}

TEST_CASE("identical matrices give unit singular-vector alignment") {
    Rng rng(13);
    Mat z(16, 8);
    for (double& x : z.v) x = rng.gaussian();
    const std::vector<double> v1 = truncated_svd(z, 1).top_right_singular_vector();
    Mat negated = z;
    for (double& x : negated.v) x = -x;
    const std::vector<double> v2 = truncated_svd(negated, 1).top_right_singular_vector();
    CHECK(std::fabs(dot(v1.data(), v1.data(), 8)) == doctest::Approx(1.0));
    // sign flips leave the absolute cosine at one
    CHECK(std::fabs(dot(v1.data(), v2.data(), 8)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unrelated random matrices have low median alignment") {
    Rng rng(17);
    std::vector<double> cosines;
    for (int trial = 0; trial < 40; ++trial) {
        Mat a(32, 64), b(32, 64);
        for (double& x : a.v) x = rng.gaussian();
        for (double& x : b.v) x = rng.gaussian();
        const std::vector<double> va = truncated_svd(a, 1).top_right_singular_vector();
        const std::vector<double> vb = truncated_svd(b, 1).top_right_singular_vector();
        cosines.push_back(std::fabs(dot(va.data(), vb.data(), 64)));
    }
    std::sort(cosines.begin(), cosines.end());
    CHECK(cosines[cosines.size() / 2] < 0.3);
}

TEST_CASE("spectral similarity runs on a model and stays in range") {
    Model model = toy_model();
    Rng rng(19);
    const std::vector<double> cosines = spectral_similarity(model, 6, 16, rng);
    REQUIRE(cosines.size() == 6);
    for (double c : cosines) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0 + 1e-9);
    }
}

namespace {

NoisePredictor constant_toy(std::vector<double> with_cond, std::vector<double> without) {
    return [with_cond, without](const std::vector<double>&, double,
                                const std::vector<double>* c) {
        return c ? with_cond : without;
    };
}

NoisePredictor linear_toy(const Mat& a, const std::vector<double>& shift) {
    return [a, shift](const std::vector<double>& v, double, const std::vector<double>* c) {
        std::vector<double> out(v.size(), 0.0);
        for (size_t i = 0; i < v.size(); ++i) {
            for (size_t j = 0; j < v.size(); ++j) out[i] += a.at(i, j) * v[j];
            if (c) out[i] += shift[i];
        }
        return out;
    };
}

}  // namespace

TEST_CASE("constant predictors cancel exactly in the round trip") {
    const DiffusionSchedule sched = build_schedule(32, 1e-3, 0.02);
    std::vector<double> cs{0.2, -0.1, 0.4, 0.0};
    std::vector<double> c0{-0.3, 0.5, 0.1, 0.2};
    const std::vector<double> cond{1.0};
    const TheoremReport report = verify_theorem_a(sched, {8, 4, 2, 1},
                                                  constant_toy(cs, c0), cond, 1.2, 0.3, 4, 6, 21);
    CHECK(report.passed);
    for (const TheoremRow& row : report.rows) CHECK(row.measured < 1e-6);
}

TEST_CASE("equal guidance scales reduce the closed form to the identity and report the residual") {
    const DiffusionSchedule sched = build_schedule(32, 1e-3, 0.02);
    Rng rng(22);
    Mat a(4, 4);
    for (double& x : a.v) x = 0.05 * rng.gaussian();
    std::vector<double> shift{1.0, -1.0, 0.5, 0.25};
    const std::vector<double> cond{1.0};
    const TheoremReport report =
        verify_theorem_a(sched, {4}, linear_toy(a, shift), cond, 0.9, 0.9, 4, 6, 23);
    // kappa = 0: the closed form returns v_T; the explicit path deviation is
    // the reported Taylor remainder
    CHECK(report.rows[0].reference == doctest::Approx(0.0));
    CHECK(report.rows[0].measured > 0.0);
}

TEST_CASE("linear predictor deviation shrinks as the step size halves") {
    const DiffusionSchedule sched = build_schedule(64, 1e-3, 0.015);
    Rng rng(24);
    Mat a(6, 6);
    for (double& x : a.v) x = 0.04 * rng.gaussian();
    std::vector<double> shift(6);
    for (double& x : shift) x = rng.gaussian();
    const std::vector<double> cond{1.0};
    const TheoremReport report =
        verify_theorem_a(sched, {8, 4, 2, 1}, linear_toy(a, shift), cond, 1.5, 0.5, 6, 6, 25);
    CHECK(report.passed);  // strictly decreasing deviations
    std::vector<TheoremRow> rows = report.rows;
    std::sort(rows.begin(), rows.end(),
              [](const TheoremRow& x, const TheoremRow& y) { return x.x > y.x; });
    for (size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i + 1].measured < rows[i].measured);
}

TEST_CASE("identity generator satisfies the preference bound on the whole grid") {
    const int dim = 8;
    Rng rng(31);
    std::vector<double> u(dim), gs(dim);
    for (double& x : u) x = rng.gaussian();
    for (int i = 0; i < dim; ++i) gs[i] = u[i] + 0.2 * rng.gaussian();
    GeneratorFn identity = [](const std::vector<double>& v) { return v; };
    double delta = 0.0, un = 0.0, gn = 0.0;
    for (int i = 0; i < dim; ++i) {
        delta += u[i] * gs[i];
        un += u[i] * u[i];
        gn += gs[i] * gs[i];
    }
    REQUIRE(delta > 0.0);
    const double kappa_star = delta / (2.0 * std::sqrt(un * gn));
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(2.0 * kappa_star * i / 20.0);
    const TheoremReport report = verify_theorem_b(identity, u, gs, grid, 2000, 33);
    CHECK(report.passed);
    CHECK(report.gamma == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.kappa_star == doctest::Approx(kappa_star).epsilon(1e-9));
    CHECK(std::fabs(report.kappa_measured - report.kappa_star) <= 0.2 * report.kappa_star);
    // improvement for the identity is exactly kappa * delta
    for (const TheoremRow& row : report.rows) {
        CHECK(row.measured == doctest::Approx(row.x * delta).epsilon(1e-9));
    }
}

TEST_CASE("closed forms for the unit toy") {
    // delta = 1, gamma = 1, |u| = |g_s| = 1 -> kappa* = 0.5, improvement* = 0.25
    std::vector<double> u{1.0, 0.0};
    std::vector<double> gs{1.0, 0.0};
    GeneratorFn identity = [](const std::vector<double>& v) { return v; };
    const TheoremReport report =
        verify_theorem_b(identity, u, gs, {0.25, 0.5, 0.75}, 500, 35);
    CHECK(report.kappa_star == doctest::Approx(0.5));
    CHECK(report.improvement_star == doctest::Approx(0.25));
}

TEST_CASE("misaligned semantics yield a no-verdict report") {
    std::vector<double> u{1.0, 0.0};
    std::vector<double> gs{-1.0, 0.0};
    GeneratorFn identity = [](const std::vector<double>& v) { return v; };
    const TheoremReport report = verify_theorem_b(identity, u, gs, {0.5}, 100, 36);
    CHECK(!report.passed);
    CHECK(report.status.find("alignment hypothesis violated") != std::string::npos);
}

TEST_CASE("smooth nonlinear generator stays within the estimated bound") {
    const int dim = 6;
    Rng rng(41);
    std::vector<double> u(dim), gs(dim);
    for (double& x : u) x = rng.gaussian();
    for (int i = 0; i < dim; ++i) gs[i] = u[i] + 0.1 * rng.gaussian();
    GeneratorFn squash = [](const std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(0.5 * v[i]);
        return out;
    };
    double delta = 0.0, un = 0.0, gn = 0.0;
    for (int i = 0; i < dim; ++i) {
        delta += u[i] * gs[i];
        un += u[i] * u[i];
        gn += gs[i] * gs[i];
    }
    REQUIRE(delta > 0.0);
    const double kappa_star = delta / (2.0 * 0.5 * std::sqrt(un * gn));
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(kappa_star * i / 10.0);
    const TheoremReport report = verify_theorem_b(squash, u, gs, grid, 4000, 43);
    CHECK(report.gamma <= 0.5 + 1e-6);
    CHECK(report.gamma_spread >= 0.0);
    CHECK(report.status == "ok");
}

TEST_CASE("embedding exports round trip at full precision") {
    Model model = toy_model(Variant::full, 7, 20);
    const std::string dir = (fs::temp_directory_path() / "infodcl_export").string();
    fs::create_directories(dir);

    export_embeddings(model, EmbeddingSelector::items, dir + "/items.txt", 3);
    std::ifstream in(dir + "/items.txt");
    std::vector<double> values;
    double x = 0.0;
    while (in >> x) values.push_back(x);
    REQUIRE(values.size() == static_cast<size_t>(20 * 8));
    const Mat items = model.item_mat();
    for (size_t i = 0; i < values.size(); ++i) CHECK(values[i] == items.v[i]);

    export_embeddings(model, EmbeddingSelector::generated, dir + "/gen.txt", 3);
    std::ifstream gin(dir + "/gen.txt");
    std::vector<double> gen_values;
    while (gin >> x) gen_values.push_back(x);
    REQUIRE(gen_values.size() == values.size());
    double dist = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        dist += (values[i] - gen_values[i]) * (values[i] - gen_values[i]);
    }
    CHECK(dist > 0.0);

    CHECK_THROWS_AS(embedding_selector_from("everything"), ConfigError);
}
