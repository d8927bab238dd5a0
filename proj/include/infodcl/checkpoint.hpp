#pragma once

#include <string>
#include <vector>

#include "infodcl/config.hpp"
#include "infodcl/trainer.hpp"

namespace infodcl {

// Training snapshot: every parameter tensor, the frozen channel metadata,
// optimizer moments, epoch counter, config snapshot and metric history.
// Serialized as a text manifest followed by a flat little-endian float32
// payload; reload is bit-exact.
struct Checkpoint {
    Config config;
    Model model;
    OptimizerState opt;
    int epoch = 0;
    std::vector<std::string> metric_history;
};

Checkpoint make_checkpoint(const Config& config, const TrainResult& result);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// `expected` guards resume-style loads: a config-hash mismatch refuses the
// load rather than silently reinterpreting tensors.
Checkpoint load_checkpoint(const std::string& path, const Config* expected = nullptr);

}  // namespace infodcl
