// infodcl command-line driver: dataset preparation, training, evaluation and
// the numerical analysis suite, all configured through flat key=value files
// with per-key flag overrides.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "infodcl/analysis.hpp"
#include "infodcl/checkpoint.hpp"
#include "infodcl/config.hpp"
#include "infodcl/dataset.hpp"
#include "infodcl/eval.hpp"
#include "infodcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace infodcl;

namespace {

struct CommonArgs {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "config file (key = value, [section] headers)");
    for (const std::string& key : Config::defaults().keys()) {
        cmd->add_option_function<std::string>(
            "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
            "override config key " + key);
    }
}

Config resolve_config(const CommonArgs& args) {
    Config config = Config::defaults();
    if (!args.config_file.empty()) config.load_file(args.config_file);
    for (const auto& [key, value] : args.overrides) config.set(key, value);
    return config;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
}

EvalReport evaluate_checkpoint(Checkpoint& ckpt, const InteractionDataset& ds, EvalSplit split) {
    const NormalizedAdjacency adj = build_normalized_adjacency(ds);
    Mat users_out, items_out;
    propagate_gcn(ckpt.model.user_mat(), ckpt.model.item_mat(), adj,
                  ckpt.model.cfg.gcn_layers, users_out, items_out);
    EvalReport report =
        ranking_metrics(users_out, items_out, ds, split, ckpt.model.cfg.cutoffs);
    report.config_hash = ckpt.config.hash();
    return report;
}

int cmd_prepare(const CommonArgs& args, const std::string& data, const std::string& out) {
    const Config config = resolve_config(args);
    LoadFormat fmt;
    fmt.delimiter = config.get("data.delimiter");
    InteractionDataset ds = load_interactions(data.empty() ? config.get("data.path") : data, fmt);
    std::cout << "loaded users=" << ds.num_users << " items=" << ds.num_items
              << " interactions=" << ds.total_interactions()
              << " sparsity=" << ds.sparsity() * 100.0 << "%\n";
    ds = split_dataset(std::move(ds), config.get_double("data.split_train"),
                       config.get_double("data.split_valid"),
                       config.get_double("data.split_test"),
                       static_cast<uint64_t>(config.get_long("data.seed")));
    save_processed(ds, out);
    std::cout << "wrote processed dataset to " << out << " (train=" << ds.train.size()
              << " valid=" << ds.valid.size() << " test=" << ds.test.size() << ")\n";
    return 0;
}

int cmd_pretrain_metadata(const CommonArgs& args, const std::string& data,
                          const std::string& out) {
    const Config config = resolve_config(args);
    const TrainConfig cfg = train_config_from(config);
    const InteractionDataset ds = load_processed(data);
    const std::vector<Mat> metadata = build_channel_metadata(ds, cfg);
    fs::create_directories(out);
    for (size_t c = 0; c < metadata.size(); ++c) {
        const std::string path = out + "/metadata_channel" + std::to_string(c + 1) + ".txt";
        save_matrix_text(metadata[c], path);
        std::cout << "wrote " << path << " (" << metadata[c].rows << "x" << metadata[c].cols
                  << ")\n";
    }
    return 0;
}

int run_train(const Config& config, const InteractionDataset& ds, const std::string& out) {
    const TrainConfig cfg = train_config_from(config);
    fs::create_directories(out);
    write_file(out + "/config.cfg", config.canonical_text());
    std::ofstream log(out + "/train_log.txt");
    const TrainResult result = run_training(ds, cfg, std::nullopt, &log);
    Checkpoint ckpt = make_checkpoint(config, result);
    save_checkpoint(ckpt, out + "/best.ckpt");
    std::cout << "best epoch " << result.best_epoch << " valid metric " << result.best_metric
              << "\n";

    EvalReport report = evaluate_checkpoint(ckpt, ds, EvalSplit::test);
    write_file(out + "/metrics.csv", report_csv(report));
    write_file(out + "/metrics.txt", report_text(report));
    std::cout << report_text(report);
    return 0;
}

int cmd_train(const CommonArgs& args, const std::string& data, const std::string& out) {
    const Config config = resolve_config(args);
    return run_train(config, load_processed(data), out);
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path, const std::string& data,
             const std::string& split, const std::string& out) {
    (void)args;
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    const InteractionDataset ds = load_processed(data);
    const EvalSplit s = split == "valid" ? EvalSplit::valid : EvalSplit::test;
    const EvalReport report = evaluate_checkpoint(ckpt, ds, s);
    std::cout << report_text(report);
    if (!out.empty()) {
        fs::create_directories(out);
        write_file(out + "/eval_" + split + ".csv", report_csv(report));
        write_file(out + "/eval_" + split + ".txt", report_text(report));
    }
    return 0;
}

int cmd_analyze_snr(const CommonArgs& args, const std::string& ckpt_path,
                    const std::string& out) {
    const Config config = resolve_config(args);
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Rng rng(static_cast<uint64_t>(config.get_long("analysis.seed")));
    const SNRCurve curve =
        snr_curve(ckpt.model, config.get_int("analysis.snr_samples"), rng);
    fs::create_directories(out);
    write_file(out + "/snr.csv", snr_curve_csv(curve));
    const size_t last = curve.snr_gaussian.size() - 1;
    std::cout << "snr at t=T gaussian=" << curve.snr_gaussian[last]
              << " informative=" << curve.snr_informative[last] << "\n"
              << "wrote " << out << "/snr.csv\n";
    return 0;
}

int cmd_spectral(const CommonArgs& args, const std::string& ckpt_path, const std::string& out) {
    const Config config = resolve_config(args);
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    Rng rng(static_cast<uint64_t>(config.get_long("analysis.seed")));
    const std::vector<double> cosines = spectral_similarity(
        ckpt.model, config.get_int("analysis.spectral_batches"),
        config.get_int("analysis.spectral_batch_size"), rng,
        config.get_bool("analysis.reverse_chain"), config.get_int("analysis.reverse_steps"));
    fs::create_directories(out);
    std::ostringstream csv;
    csv << "batch,abs_cosine\n";
    csv.precision(10);
    double mean = 0.0;
    for (size_t i = 0; i < cosines.size(); ++i) {
        csv << i << ',' << cosines[i] << '\n';
        mean += cosines[i];
    }
    write_file(out + "/spectral_similarity.csv", csv.str());
    std::cout << "mean |cosine| = " << mean / cosines.size() << "\nwrote " << out
              << "/spectral_similarity.csv\n";
    return 0;
}

int cmd_verify_theory(const CommonArgs& args, const std::string& theorem,
                      const std::string& k_list, const std::string& generator,
                      const std::string& out) {
    const Config config = resolve_config(args);
    const uint64_t seed = static_cast<uint64_t>(config.get_long("analysis.seed"));
    fs::create_directories(out);
    if (theorem == "a") {
        const DiffusionSchedule sched = build_schedule(
            config.get_int("diffusion.steps"), config.get_double("diffusion.beta_first"),
            config.get_double("diffusion.beta_last"));
        std::vector<int> ks;
        std::stringstream ss(k_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) ks.push_back(std::stoi(tok));
        }
        if (ks.empty()) throw ConfigError("verify-theory: --k list is empty");
        const int dim = 16;
        Rng prng(mix_seed(seed, 0x77));
        Mat lin(dim, dim);
        std::vector<double> cond_shift(dim), time_shift(dim), cond(dim);
        for (double& x : lin.v) x = 0.05 * prng.gaussian();
        for (double& x : cond_shift) x = prng.gaussian();
        for (double& x : time_shift) x = 0.01 * prng.gaussian();
        for (double& x : cond) x = prng.gaussian();
        NoisePredictor pred = [&](const std::vector<double>& v, double t,
                                  const std::vector<double>* c) {
            std::vector<double> outv(dim, 0.0);
            for (int i = 0; i < dim; ++i) {
                double s = time_shift[i] * t;
                for (int j = 0; j < dim; ++j) s += lin.at(i, j) * v[j];
                if (c) s += cond_shift[i];
                outv[i] = s;
            }
            return outv;
        };
        const TheoremReport report =
            verify_theorem_a(sched, ks, pred, cond, 1.5, 0.5, dim, 8, seed);
        write_file(out + "/theorem_a.csv", theorem_report_csv(report));
        std::cout << theorem_report_text(report) << "wrote " << out << "/theorem_a.csv\n";
        return 0;
    }
    if (theorem == "b") {
        const int dim = 16;
        Rng prng(mix_seed(seed, 0x88));
        std::vector<double> u(dim), gs(dim);
        for (double& x : u) x = prng.gaussian();
        for (int i = 0; i < dim; ++i) gs[i] = u[i] + 0.3 * prng.gaussian();
        GeneratorFn gen;
        if (generator == "identity") {
            gen = [](const std::vector<double>& v) { return v; };
        } else if (generator == "linear") {
            gen = [](const std::vector<double>& v) {
                std::vector<double> outv(v.size());
                for (size_t i = 0; i < v.size(); ++i) outv[i] = 0.8 * v[i];
                return outv;
            };
        } else if (generator == "tanh") {
            gen = [](const std::vector<double>& v) {
                std::vector<double> outv(v.size());
                for (size_t i = 0; i < v.size(); ++i) outv[i] = std::tanh(v[i]);
                return outv;
            };
        } else {
            throw ConfigError("verify-theory: unknown generator '" + generator + "'");
        }
        double delta = 0.0, un = 0.0, gn = 0.0;
        for (int i = 0; i < dim; ++i) {
            delta += u[i] * gs[i];
            un += u[i] * u[i];
            gn += gs[i] * gs[i];
        }
        const double kappa_star = delta / (2.0 * std::sqrt(un) * std::sqrt(gn));
        std::vector<double> grid;
        for (int i = 1; i <= 20; ++i) grid.push_back(2.0 * kappa_star * i / 20.0);
        const TheoremReport report = verify_theorem_b(
            gen, u, gs, grid, config.get_int("analysis.theorem_samples"), seed);
        write_file(out + "/theorem_b.csv", theorem_report_csv(report));
        std::cout << theorem_report_text(report) << "wrote " << out << "/theorem_b.csv\n";
        return 0;
    }
    throw ConfigError("verify-theory: --theorem must be a or b");
}

int cmd_export(const CommonArgs& args, const std::string& ckpt_path, const std::string& which,
               const std::string& out) {
    const Config config = resolve_config(args);
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    export_embeddings(ckpt.model, embedding_selector_from(which), out,
                      static_cast<uint64_t>(config.get_long("analysis.seed")),
                      config.get_bool("analysis.reverse_chain"),
                      config.get_int("analysis.reverse_steps"));
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& data, const std::string& out) {
    const Config base = resolve_config(args);
    const InteractionDataset ds = load_processed(data);
    const std::vector<std::string> variants{"full", "no_sr", "no_cr", "no_psnet", "no_cbl"};
    std::ostringstream table;
    table << "variant";
    const std::vector<int> cutoffs = base.get_int_list("eval.cutoffs");
    for (int k : cutoffs) table << ",recall@" << k << ",ndcg@" << k;
    table << "\n";
    // metadata is shared across variants; compute once
    const TrainConfig base_cfg = train_config_from(base);
    const std::vector<Mat> metadata = build_channel_metadata(ds, base_cfg);
    for (const std::string& variant : variants) {
        Config config = base;
        config.set("trainer.variant", variant);
        const TrainConfig cfg = train_config_from(config);
        const std::string run_dir = out + "/" + variant;
        fs::create_directories(run_dir);
        write_file(run_dir + "/config.cfg", config.canonical_text());
        std::ofstream log(run_dir + "/train_log.txt");
        const TrainResult result = run_training(ds, cfg, metadata, &log);
        Checkpoint ckpt = make_checkpoint(config, result);
        save_checkpoint(ckpt, run_dir + "/best.ckpt");
        const EvalReport report = evaluate_checkpoint(ckpt, ds, EvalSplit::test);
        write_file(run_dir + "/metrics.csv", report_csv(report));
        table << variant;
        table.precision(6);
        table << std::fixed;
        for (int k : cutoffs) table << ',' << report.recall_at(k) << ',' << report.ndcg_at(k);
        table << "\n";
        std::cout << "finished variant " << variant << "\n";
    }
    write_file(out + "/ablation.csv", table.str());
    std::cout << table.str() << "wrote " << out << "/ablation.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infodcl: diffusion-based contrastive recommender training and analysis"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string data, out, ckpt_path, split = "test", theorem = "a", k_list = "1,2,4,8";
    std::string which = "items", generator = "identity";

    CLI::App* prepare = app.add_subcommand("prepare", "ingest raw interactions and split");
    prepare->add_option("--data", data, "raw interaction file")->required();
    prepare->add_option("--out", out, "processed dataset directory")->required();
    add_config_options(prepare, args);

    CLI::App* pretrain =
        app.add_subcommand("pretrain-metadata", "materialize channel metadata matrices");
    pretrain->add_option("--data", data, "processed dataset directory")->required();
    pretrain->add_option("--out", out, "output directory")->required();
    add_config_options(pretrain, args);

    CLI::App* train = app.add_subcommand("train", "train a model");
    train->add_option("--data", data, "processed dataset directory")->required();
    train->add_option("--out", out, "run directory")->required();
    add_config_options(train, args);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("--data", data, "processed dataset directory")->required();
    eval_cmd->add_option("--split", split, "valid or test");
    eval_cmd->add_option("--out", out, "optional output directory");
    add_config_options(eval_cmd, args);

    CLI::App* snr_cmd = app.add_subcommand("analyze-snr", "latent SNR curves per timestep");
    snr_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    snr_cmd->add_option("--out", out, "output directory")->required();
    add_config_options(snr_cmd, args);

    CLI::App* spectral =
        app.add_subcommand("spectral-similarity", "top singular-vector alignment");
    spectral->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    spectral->add_option("--out", out, "output directory")->required();
    add_config_options(spectral, args);

    CLI::App* verify = app.add_subcommand("verify-theory", "numerical theorem checks on toys");
    verify->add_option("--theorem", theorem, "a or b")->required();
    verify->add_option("--k", k_list, "comma-separated step sizes (theorem a)");
    verify->add_option("--generator", generator, "identity|linear|tanh (theorem b)");
    verify->add_option("--out", out, "output directory")->required();
    add_config_options(verify, args);

    CLI::App* export_cmd = app.add_subcommand("export-embeddings", "dump embedding matrices");
    export_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    export_cmd->add_option("--which", which, "items|users|generated");
    export_cmd->add_option("--out", out, "output file")->required();
    add_config_options(export_cmd, args);

    CLI::App* ablate = app.add_subcommand("ablate", "run the component-removal variants");
    ablate->add_option("--data", data, "processed dataset directory")->required();
    ablate->add_option("--out", out, "output directory")->required();
    add_config_options(ablate, args);

    CLI::App* print_cfg = app.add_subcommand("print-config", "print the resolved configuration");
    add_config_options(print_cfg, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(args, data, out);
        if (pretrain->parsed()) return cmd_pretrain_metadata(args, data, out);
        if (train->parsed()) return cmd_train(args, data, out);
        if (eval_cmd->parsed()) return cmd_eval(args, ckpt_path, data, split, out);
        if (snr_cmd->parsed()) return cmd_analyze_snr(args, ckpt_path, out);
        if (spectral->parsed()) return cmd_spectral(args, ckpt_path, out);
        if (verify->parsed()) return cmd_verify_theory(args, theorem, k_list, generator, out);
        if (export_cmd->parsed()) return cmd_export(args, ckpt_path, which, out);
        if (ablate->parsed()) return cmd_ablate(args, data, out);
        if (print_cfg->parsed()) {
            std::cout << resolve_config(args).canonical_text();
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
