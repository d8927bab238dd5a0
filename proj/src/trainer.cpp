#include "infodcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "infodcl/eval.hpp"

namespace infodcl {

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no_sr") return Variant::no_sr;
    if (s == "no_cr") return Variant::no_cr;
    if (s == "no_psnet") return Variant::no_psnet;
    if (s == "no_cbl") return Variant::no_cbl;
    throw ConfigError("unknown variant '" + s + "'");
}

std::string variant_to_string(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_sr: return "no_sr";
        case Variant::no_cr: return "no_cr";
        case Variant::no_psnet: return "no_psnet";
        case Variant::no_cbl: return "no_cbl";
    }
    return "full";
}

void TrainConfig::validate() const {
    if (dim < 1) throw ConfigError("trainer.dim must be >= 1");
    if (batch < 1) throw ConfigError("trainer.batch must be >= 1");
    if (epochs < 0) throw ConfigError("trainer.epochs must be >= 0");
    if (learning_rate < 0.0) throw ConfigError("trainer.lr must be >= 0");
    if (num_channels != 1 && num_channels != 2) {
        throw ConfigError("trainer.channels must be 1 or 2");
    }
    if (svd_rank < 1 || svd_rank > dim) throw ConfigError("psnet.rank must lie in [1, dim]");
    if (diffusion_steps < 1) throw ConfigError("diffusion.steps must be >= 1");
    if (gcn_layers < 0 || gcn_layers > 8) throw ConfigError("eval.gcn_layers out of range");
    if (cutoffs.empty()) throw ConfigError("eval.cutoffs must be non-empty");
    for (int k : cutoffs) {
        if (k < 1) throw ConfigError("eval.cutoffs entries must be >= 1");
    }
    if (patience < 1) throw ConfigError("trainer.patience must be >= 1");
    if (eval_every < 1) throw ConfigError("trainer.eval_every must be >= 1");
    weights.validate();
}

LossWeights TrainConfig::effective_weights() const {
    LossWeights w = weights;
    if (variant == Variant::no_cbl) w.lambda_bal = 0.0;
    return w;
}

PsnetVariant TrainConfig::psnet_variant() const {
    switch (variant) {
        case Variant::no_sr: return PsnetVariant::no_sr;
        case Variant::no_cr: return PsnetVariant::no_cr;
        case Variant::no_psnet: return PsnetVariant::no_psnet;
        default: return PsnetVariant::full;
    }
}

TrainConfig train_config_from(const Config& c) {
    TrainConfig t;
    t.dim = c.get_int("trainer.dim");
    t.batch = c.get_int("trainer.batch");
    t.epochs = c.get_int("trainer.epochs");
    t.learning_rate = c.get_double("trainer.lr");
    const std::string opt = c.get("trainer.optimizer");
    if (opt == "adam") {
        t.optimizer = OptKind::adam;
    } else if (opt == "adamw") {
        t.optimizer = OptKind::adamw;
    } else {
        throw ConfigError("trainer.optimizer must be adam or adamw");
    }
    t.weight_decay = c.get_double("trainer.weight_decay");
    t.num_channels = c.get_int("trainer.channels");
    t.variant = variant_from_string(c.get("trainer.variant"));
    t.seed = static_cast<uint64_t>(c.get_long("trainer.seed"));
    t.patience = c.get_int("trainer.patience");
    t.eval_every = c.get_int("trainer.eval_every");

    t.diffusion_steps = c.get_int("diffusion.steps");
    t.beta_first = c.get_double("diffusion.beta_first");
    t.beta_last = c.get_double("diffusion.beta_last");
    t.time_embed_dim = c.get_int("diffusion.time_embed_dim");

    t.svd_rank = c.get_int("psnet.rank");
    t.ln_eps = c.get_double("psnet.ln_eps");

    t.weights.tau = c.get_double("objectives.tau");
    t.weights.lambda_bpr = c.get_double("objectives.lambda_bpr");
    t.weights.lambda_con = c.get_double("objectives.lambda_con");
    t.weights.lambda_bal = c.get_double("objectives.lambda_bal");
    t.weights.lambda_reg = c.get_double("objectives.lambda_reg");

    t.sim_k = c.get_int("metadata.k");
    t.pretrain.layers = c.get_int("metadata.pretrain_layers");
    t.pretrain.dim = t.dim;
    t.pretrain.epochs = c.get_int("metadata.pretrain_epochs");
    t.pretrain.learning_rate = c.get_double("metadata.pretrain_lr");
    t.pretrain.batch = c.get_int("metadata.pretrain_batch");
    t.pretrain.seed = static_cast<uint64_t>(c.get_long("metadata.seed"));
    t.channel1_file = c.get("metadata.channel1_file");
    t.channel2_file = c.get("metadata.channel2_file");

    t.gcn_layers = c.get_int("eval.gcn_layers");
    t.cutoffs = c.get_int_list("eval.cutoffs");
    t.validate();
    return t;
}

std::vector<ParamTensor*> Model::trainable_params() {
    std::vector<ParamTensor*> out;
    out.push_back(&user_emb);
    out.push_back(&item_emb);
    for (Channel& ch : channels) {
        ch.psnet.collect_params(out);
        ch.denoiser.collect_params(out);
    }
    return out;
}

void Model::zero_grads() {
    for (ParamTensor* p : trainable_params()) p->zero_grad();
}

Mat Model::user_mat() const {
    Mat m(user_emb.shape[0], user_emb.shape[1]);
    for (size_t i = 0; i < user_emb.size(); ++i) m.v[i] = user_emb.get(i);
    return m;
}

Mat Model::item_mat() const {
    Mat m(item_emb.shape[0], item_emb.shape[1]);
    for (size_t i = 0; i < item_emb.size(); ++i) m.v[i] = item_emb.get(i);
    return m;
}

namespace {

// Metadata is frozen and checkpointed as float32; rounding it once up front
// keeps in-memory state identical to a save/load round trip.
void round_to_float32(Mat& m) {
    for (double& x : m.v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace

Model Model::build(const TrainConfig& cfg, int num_users, int num_items,
                   std::vector<Mat> channel_metadata) {
    cfg.validate();
    if (static_cast<int>(channel_metadata.size()) != cfg.num_channels) {
        throw ConfigError("Model::build: metadata count != channel count");
    }
    Model m;
    m.cfg = cfg;
    m.schedule = build_schedule(cfg.diffusion_steps, cfg.beta_first, cfg.beta_last);
    m.user_emb = init_params("user_emb", {num_users, cfg.dim}, InitScheme::xavier,
                             mix_seed(cfg.seed, 21));
    m.item_emb = init_params("item_emb", {num_items, cfg.dim}, InitScheme::xavier,
                             mix_seed(cfg.seed, 22));
    for (int c = 0; c < cfg.num_channels; ++c) {
        Channel ch;
        ch.source = c == 0 ? "item-sim" : "user-sim-1hop";
        if (channel_metadata[c].rows != num_items || channel_metadata[c].cols != cfg.dim) {
            throw ConfigError("Model::build: channel metadata must be num_items x dim");
        }
        ch.metadata = std::move(channel_metadata[c]);
        round_to_float32(ch.metadata);
        ch.psnet = PSNetParams::make(cfg.dim, cfg.svd_rank, cfg.psnet_variant(),
                                     mix_seed(cfg.seed, 31 + c), cfg.ln_eps);
        ch.denoiser = DenoiserParams::make(cfg.dim, 4 * cfg.dim, cfg.time_embed_dim,
                                           mix_seed(cfg.seed, 41 + c));
        // channel-qualified parameter names keep the checkpoint manifest unambiguous
        std::vector<ParamTensor*> params;
        ch.psnet.collect_params(params);
        ch.denoiser.collect_params(params);
        for (ParamTensor* p : params) p->name = "c" + std::to_string(c) + "." + p->name;
        m.channels.push_back(std::move(ch));
    }
    return m;
}

std::vector<Mat> build_channel_metadata(const InteractionDataset& ds, const TrainConfig& cfg) {
    std::vector<Mat> metadata;
    const bool need_pretrain =
        (cfg.channel1_file.empty() || (cfg.num_channels > 1 && cfg.channel2_file.empty()));
    PretrainedEmbeddings pre;
    if (need_pretrain) {
        PretrainConfig pc = cfg.pretrain;
        pc.dim = cfg.dim;
        pre = pretrain_base_embeddings(ds, pc);
    }
    for (int c = 0; c < cfg.num_channels; ++c) {
        const std::string& file = c == 0 ? cfg.channel1_file : cfg.channel2_file;
        if (!file.empty()) {
            metadata.push_back(load_metadata_file(file, ds.num_items, cfg.dim));
            continue;
        }
        if (c == 0) {
            const SimilarityGraph g = build_similarity_graph(ds, Side::item, cfg.sim_k);
            metadata.push_back(synthesize_metadata(pre.items, Side::item, g).rows);
        } else {
            const SimilarityGraph g = build_similarity_graph(ds, Side::user, cfg.sim_k);
            const MetadataMatrix user_meta = synthesize_metadata(pre.users, Side::user, g);
            metadata.push_back(
                project_user_metadata_to_items(user_meta.rows, build_normalized_adjacency(ds)));
        }
    }
    return metadata;
}

BatchInputs sample_batch_inputs(const InteractionDataset& ds, const Model& model, int batch,
                                Rng& rng) {
    BatchInputs inputs;
    inputs.triples = sample_bpr_triples(ds, batch, rng);
    const int dim = model.cfg.dim;
    for (size_t c = 0; c < model.channels.size(); ++c) {
        Mat eps(static_cast<int>(inputs.triples.size()), dim);
        rng.fill_gaussian(eps);
        inputs.eps_per_channel.push_back(std::move(eps));
        inputs.t_per_channel.push_back(1 + rng.uniform_int(model.cfg.diffusion_steps));
    }
    return inputs;
}

LossBreakdown compute_batch(Model& model, const BatchInputs& inputs, bool with_grads) {
    const int batch = static_cast<int>(inputs.triples.size());
    const int dim = model.cfg.dim;
    const LossWeights w = model.cfg.effective_weights();

    Mat users_b(batch, dim), pos_b(batch, dim), neg_b(batch, dim);
    for (int i = 0; i < batch; ++i) {
        const BprTriple& tr = inputs.triples[i];
        for (int d = 0; d < dim; ++d) {
            users_b.at(i, d) = model.user_emb.get(static_cast<size_t>(tr.user) * dim + d);
            pos_b.at(i, d) = model.item_emb.get(static_cast<size_t>(tr.pos) * dim + d);
            neg_b.at(i, d) = model.item_emb.get(static_cast<size_t>(tr.neg) * dim + d);
        }
    }
    Mat d_users(batch, dim), d_pos(batch, dim), d_neg(batch, dim);

    std::vector<double> pos_scores(batch), neg_scores(batch);
    for (int i = 0; i < batch; ++i) {
        pos_scores[i] = dot(users_b.row(i), pos_b.row(i), dim);
        neg_scores[i] = dot(users_b.row(i), neg_b.row(i), dim);
    }
    std::vector<double> d_pos_score, d_neg_score;
    const double bpr = bpr_loss(pos_scores, neg_scores,
                                with_grads ? &d_pos_score : nullptr,
                                with_grads ? &d_neg_score : nullptr, w.lambda_bpr);
    if (with_grads) {
        for (int i = 0; i < batch; ++i) {
            const double gp = d_pos_score[i];
            const double gn = d_neg_score[i];
            double* du = d_users.row(i);
            double* dp = d_pos.row(i);
            double* dn = d_neg.row(i);
            const double* u = users_b.row(i);
            const double* ep = pos_b.row(i);
            const double* en = neg_b.row(i);
            for (int d = 0; d < dim; ++d) {
                du[d] += gp * ep[d] + gn * en[d];
                dp[d] += gp * u[d];
                dn[d] += gn * u[d];
            }
        }
    }

    // touched-row regularizer over users, positives and sampled negatives
    Mat item_rows(2 * batch, dim);
    for (int i = 0; i < batch; ++i) {
        std::copy(pos_b.row(i), pos_b.row(i) + dim, item_rows.row(i));
        std::copy(neg_b.row(i), neg_b.row(i) + dim, item_rows.row(batch + i));
    }
    Mat d_item_rows;
    if (with_grads) d_item_rows = Mat(2 * batch, dim);
    const double reg = reg_loss(item_rows, users_b, with_grads ? &d_item_rows : nullptr,
                                with_grads ? &d_users : nullptr, w.lambda_reg);
    if (with_grads) {
        for (int i = 0; i < batch; ++i) {
            for (int d = 0; d < dim; ++d) {
                d_pos.at(i, d) += d_item_rows.at(i, d);
                d_neg.at(i, d) += d_item_rows.at(batch + i, d);
            }
        }
    }

    std::vector<ChannelLosses> channel_losses;
    for (size_t c = 0; c < model.channels.size(); ++c) {
        Channel& ch = model.channels[c];
        Mat meta_b(batch, dim);
        for (int i = 0; i < batch; ++i) {
            const double* src = ch.metadata.row(inputs.triples[i].pos);
            std::copy(src, src + dim, meta_b.row(i));
        }
        const Mat& eps = inputs.eps_per_channel[c];
        const int t = inputs.t_per_channel[c];

        PsnetCache psnet_cache;
        const Mat eps_m = psnet_forward(eps, meta_b, ch.psnet, &psnet_cache);
        const Mat z = forward_diffuse(pos_b, eps_m, t, model.schedule);
        DenoiserCache den_cache;
        const Mat pred = denoise_predict(z, t, ch.denoiser, &den_cache);

        ChannelLosses losses;
        losses.recon = reconstruction_loss(pos_b, pred);
        Mat d_pred;
        if (with_grads) d_pred = Mat(batch, dim);
        losses.contrast = infonce_loss(pred, pos_b, w.tau, with_grads ? &d_pred : nullptr,
                                       with_grads ? &d_pos : nullptr, w.lambda_con);
        losses.balance = balance_loss(pred, with_grads ? &d_pred : nullptr, w.lambda_bal);
        channel_losses.push_back(losses);

        if (with_grads) {
            const double wr = 1.0 - w.lambda_bpr;
            for (int i = 0; i < batch; ++i) {
                double* dpr = d_pred.row(i);
                double* dpb = d_pos.row(i);
                const double* e = pos_b.row(i);
                const double* p = pred.row(i);
                for (int d = 0; d < dim; ++d) {
                    dpr[d] += 2.0 * wr * (p[d] - e[d]);
                    dpb[d] += 2.0 * wr * (e[d] - p[d]);
                }
            }
            const Mat d_z = denoiser_backward(d_pred, ch.denoiser, den_cache);
            const double at = model.schedule.a[t];
            const double st = model.schedule.s[t];
            Mat d_eps_m(batch, dim);
            for (size_t i = 0; i < d_z.v.size(); ++i) {
                d_pos.v[i] += at * d_z.v[i];
                d_eps_m.v[i] = st * d_z.v[i];
            }
            psnet_backward(d_eps_m, ch.psnet, psnet_cache);
        }
    }

    if (with_grads) {
        for (int i = 0; i < batch; ++i) {
            const BprTriple& tr = inputs.triples[i];
            for (int d = 0; d < dim; ++d) {
                model.user_emb.grad[static_cast<size_t>(tr.user) * dim + d] += d_users.at(i, d);
                model.item_emb.grad[static_cast<size_t>(tr.pos) * dim + d] += d_pos.at(i, d);
                model.item_emb.grad[static_cast<size_t>(tr.neg) * dim + d] += d_neg.at(i, d);
            }
        }
    }
    return total_loss(channel_losses, bpr, reg, w);
}

LossBreakdown train_epoch(Model& model, const InteractionDataset& ds, OptimizerState& opt,
                          Rng& rng) {
    const int batches =
        std::max<int>(1, static_cast<int>(ds.train.size()) / std::max(1, model.cfg.batch));
    const std::vector<ParamTensor*> params = model.trainable_params();
    LossBreakdown mean;
    for (int b = 0; b < batches; ++b) {
        const BatchInputs inputs = sample_batch_inputs(ds, model, model.cfg.batch, rng);
        model.zero_grads();
        const LossBreakdown losses = compute_batch(model, inputs, true);
        if (!std::isfinite(losses.total)) {
            std::ostringstream msg;
            msg << "train_epoch: non-finite total loss (recon=" << losses.recon
                << " bpr=" << losses.bpr << " contrast=" << losses.contrast
                << " balance=" << losses.balance << " reg=" << losses.reg << ")";
            throw NumericError(msg.str());
        }
        optimizer_step(params, opt);
        mean.recon += losses.recon;
        mean.bpr += losses.bpr;
        mean.contrast += losses.contrast;
        mean.balance += losses.balance;
        mean.reg += losses.reg;
        mean.total += losses.total;
    }
    mean.recon /= batches;
    mean.bpr /= batches;
    mean.contrast /= batches;
    mean.balance /= batches;
    mean.reg /= batches;
    mean.total /= batches;
    return mean;
}

namespace {

void snapshot_params(Model& src, Model& dst) {
    std::vector<ParamTensor*> a = src.trainable_params();
    std::vector<ParamTensor*> b = dst.trainable_params();
    for (size_t i = 0; i < a.size(); ++i) b[i]->values = a[i]->values;
}

}  // namespace

TrainResult run_training(const InteractionDataset& ds, const TrainConfig& cfg,
                         std::optional<std::vector<Mat>> precomputed_metadata,
                         std::ostream* log) {
    cfg.validate();
    std::vector<Mat> metadata = precomputed_metadata.has_value()
                                    ? std::move(*precomputed_metadata)
                                    : build_channel_metadata(ds, cfg);
    TrainResult result{Model::build(cfg, ds.num_users, ds.num_items, std::move(metadata)), {}, 0,
                       0.0, {}};
    Model& model = result.model;
    Model working = model;  // trained in place; best snapshot kept in result.model

    OptimizerState opt;
    opt.kind = cfg.optimizer;
    opt.learning_rate = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;
    std::vector<ParamTensor*> params = working.trainable_params();
    opt.attach(params);
    result.opt = opt;

    const int monitor_cutoff =
        std::find(cfg.cutoffs.begin(), cfg.cutoffs.end(), 20) != cfg.cutoffs.end()
            ? 20
            : cfg.cutoffs.front();
    const bool have_valid = !ds.valid.empty();
    NormalizedAdjacency adj;
    if (have_valid) adj = build_normalized_adjacency(ds);

    Rng rng(mix_seed(cfg.seed, 0x7a17));
    double best_metric = -1.0;
    int best_epoch = 0;
    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const LossBreakdown losses = train_epoch(working, ds, opt, rng);
        EpochLog entry;
        entry.epoch = epoch;
        entry.losses = losses;
        if (have_valid && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
            Mat users_out, items_out;
            propagate_gcn(working.user_mat(), working.item_mat(), adj, cfg.gcn_layers,
                          users_out, items_out);
            const EvalReport report =
                ranking_metrics(users_out, items_out, ds, EvalSplit::valid, cfg.cutoffs);
            entry.valid_recall = report.recall_at(monitor_cutoff);
        }
        result.history.push_back(entry);
        if (log) {
            (*log) << "epoch " << epoch << " total " << losses.total << " recon " << losses.recon
                   << " bpr " << losses.bpr << " contrast " << losses.contrast << " balance "
                   << losses.balance << " reg " << losses.reg;
            if (entry.valid_recall >= 0.0) (*log) << " valid_recall " << entry.valid_recall;
            (*log) << '\n';
            log->flush();
        }
        if (entry.valid_recall >= 0.0) {
            if (entry.valid_recall > best_metric) {
                best_metric = entry.valid_recall;
                best_epoch = epoch;
                since_best = 0;
                snapshot_params(working, result.model);
                result.opt = opt;
            } else {
                ++since_best;
                if (since_best >= cfg.patience) break;
            }
        }
    }
    if (best_metric < 0.0) {
        // never evaluated (no valid split or zero epochs): keep the final state
        snapshot_params(working, result.model);
        result.opt = opt;
        best_epoch = static_cast<int>(result.history.size());
    }
    result.best_epoch = best_epoch;
    result.best_metric = std::max(0.0, best_metric);
    return result;
}

}  // namespace infodcl
