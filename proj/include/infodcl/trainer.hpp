#pragma once

#include <optional>
#include <string>
#include <vector>

#include "infodcl/config.hpp"
#include "infodcl/dataset.hpp"
#include "infodcl/diffusion.hpp"
#include "infodcl/metadata.hpp"
#include "infodcl/objectives.hpp"
#include "infodcl/optimizer.hpp"
#include "infodcl/psnet.hpp"

namespace infodcl {

enum class Variant { full, no_sr, no_cr, no_psnet, no_cbl };

Variant variant_from_string(const std::string& s);
std::string variant_to_string(Variant v);

struct TrainConfig {
    int dim = 64;
    int batch = 1024;
    int epochs = 100;
    double learning_rate = 1e-3;
    OptKind optimizer = OptKind::adam;
    double weight_decay = 0.0;
    int num_channels = 1;
    Variant variant = Variant::full;
    uint64_t seed = 7;
    int patience = 20;
    int eval_every = 1;

    int diffusion_steps = 200;
    double beta_first = 1e-4;
    double beta_last = 0.02;
    int time_embed_dim = 16;

    int svd_rank = 8;
    double ln_eps = 1e-5;

    LossWeights weights;

    int sim_k = 10;
    PretrainConfig pretrain;
    std::string channel1_file;
    std::string channel2_file;

    int gcn_layers = 2;
    std::vector<int> cutoffs{20, 50};

    void validate() const;
    // no_cbl zeroes the balance coefficient; everything else passes through
    LossWeights effective_weights() const;
    PsnetVariant psnet_variant() const;
};

TrainConfig train_config_from(const Config& config);

struct Channel {
    std::string source;
    Mat metadata;  // num_items x dim, frozen, float32-exact entries
    PSNetParams psnet;
    DenoiserParams denoiser;
};

struct Model {
    TrainConfig cfg;
    DiffusionSchedule schedule;
    ParamTensor user_emb;
    ParamTensor item_emb;
    std::vector<Channel> channels;

    int num_users() const { return user_emb.shape[0]; }
    int num_items() const { return item_emb.shape[0]; }
    std::vector<ParamTensor*> trainable_params();
    void zero_grads();
    Mat user_mat() const;
    Mat item_mat() const;

    static Model build(const TrainConfig& cfg, int num_users, int num_items,
                       std::vector<Mat> channel_metadata);
};

// Channel metadata from the train split: channel 1 aggregates item-graph
// neighbors of the pretrained item table; channel 2 aggregates user-graph
// neighbors of the pretrained user table and projects them onto items with
// one normalized-adjacency hop. File-backed channels bypass the pretraining.
std::vector<Mat> build_channel_metadata(const InteractionDataset& ds, const TrainConfig& cfg);

struct BatchInputs {
    std::vector<BprTriple> triples;
    std::vector<Mat> eps_per_channel;
    std::vector<int> t_per_channel;
};

BatchInputs sample_batch_inputs(const InteractionDataset& ds, const Model& model, int batch,
                                Rng& rng);

// Forward (and optionally backward) pass for one fixed batch. Deterministic
// given the inputs, which makes it directly checkable with grad_check.
LossBreakdown compute_batch(Model& model, const BatchInputs& inputs, bool with_grads);

LossBreakdown train_epoch(Model& model, const InteractionDataset& ds, OptimizerState& opt,
                          Rng& rng);

struct EpochLog {
    int epoch = 0;
    LossBreakdown losses;
    double valid_recall = -1.0;  // negative when not evaluated that epoch
};

struct TrainResult {
    Model model;  // best-validation snapshot (final state when never evaluated)
    OptimizerState opt;
    int best_epoch = 0;
    double best_metric = 0.0;
    std::vector<EpochLog> history;
};

TrainResult run_training(const InteractionDataset& ds, const TrainConfig& cfg,
                         std::optional<std::vector<Mat>> precomputed_metadata = std::nullopt,
                         std::ostream* log = nullptr);

}  // namespace infodcl
