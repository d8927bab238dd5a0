#include "infodcl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace infodcl {

namespace {

constexpr const char* kMagic = "INFODCL-CKPT v1";

struct TensorRef {
    std::string name;
    std::vector<int> shape;
    const float* data = nullptr;  // save side
    size_t count = 0;
    size_t offset = 0;
};

std::string history_line(const EpochLog& e) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch=" << e.epoch << " total=" << e.losses.total << " recon=" << e.losses.recon
        << " bpr=" << e.losses.bpr << " contrast=" << e.losses.contrast
        << " balance=" << e.losses.balance << " reg=" << e.losses.reg;
    if (e.valid_recall >= 0.0) out << " valid_recall=" << e.valid_recall;
    return out.str();
}

std::vector<TensorRef> enumerate_tensors(Model& model, OptimizerState& opt,
                                         std::vector<std::vector<float>>& scratch) {
    std::vector<TensorRef> refs;
    const std::vector<ParamTensor*> params = model.trainable_params();
    for (const ParamTensor* p : params) {
        refs.push_back({p->name, p->shape, p->values.data(), p->size(), 0});
    }
    for (size_t c = 0; c < model.channels.size(); ++c) {
        const Mat& meta = model.channels[c].metadata;
        scratch.emplace_back(meta.v.size());
        std::vector<float>& buf = scratch.back();
        for (size_t i = 0; i < meta.v.size(); ++i) buf[i] = static_cast<float>(meta.v[i]);
        refs.push_back({"c" + std::to_string(c) + ".metadata",
                        {meta.rows, meta.cols},
                        buf.data(),
                        buf.size(),
                        0});
    }
    if (opt.attached()) {
        for (size_t k = 0; k < params.size(); ++k) {
            refs.push_back({"opt.m." + params[k]->name,
                            {static_cast<int>(opt.first_moment[k].size())},
                            opt.first_moment[k].data(),
                            opt.first_moment[k].size(),
                            0});
            refs.push_back({"opt.v." + params[k]->name,
                            {static_cast<int>(opt.second_moment[k].size())},
                            opt.second_moment[k].data(),
                            opt.second_moment[k].size(),
                            0});
        }
    }
    return refs;
}

void write_f32_le(std::ostream& out, const float* data, size_t count) {
    for (size_t i = 0; i < count; ++i) {
        const uint32_t bits = std::bit_cast<uint32_t>(data[i]);
        const unsigned char bytes[4] = {
            static_cast<unsigned char>(bits & 0xff),
            static_cast<unsigned char>((bits >> 8) & 0xff),
            static_cast<unsigned char>((bits >> 16) & 0xff),
            static_cast<unsigned char>((bits >> 24) & 0xff),
        };
        out.write(reinterpret_cast<const char*>(bytes), 4);
    }
}

std::vector<float> read_f32_le(std::istream& in, size_t count, const std::string& path) {
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size()) {
        throw DataError("checkpoint '" + path + "' is corrupt: truncated payload");
    }
    std::vector<float> out(count);
    for (size_t i = 0; i < count; ++i) {
        const uint32_t bits = static_cast<uint32_t>(raw[4 * i]) |
                              (static_cast<uint32_t>(raw[4 * i + 1]) << 8) |
                              (static_cast<uint32_t>(raw[4 * i + 2]) << 16) |
                              (static_cast<uint32_t>(raw[4 * i + 3]) << 24);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

}  // namespace

Checkpoint make_checkpoint(const Config& config, const TrainResult& result) {
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.model = result.model;
    ckpt.opt = result.opt;
    ckpt.epoch = result.best_epoch;
    for (const EpochLog& e : result.history) ckpt.metric_history.push_back(history_line(e));
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_checkpoint: cannot write '" + path + "'");

    Checkpoint& c = const_cast<Checkpoint&>(ckpt);
    std::vector<std::vector<float>> scratch;
    std::vector<TensorRef> refs = enumerate_tensors(c.model, c.opt, scratch);
    size_t offset = 0;
    for (TensorRef& r : refs) {
        r.offset = offset;
        offset += r.count;
    }

    out << kMagic << '\n';
    out << "config_hash " << ckpt.config.hash() << '\n';
    out << "epoch " << ckpt.epoch << '\n';
    out << "opt_step " << ckpt.opt.step_count << '\n';
    out << "history " << ckpt.metric_history.size() << '\n';
    for (const std::string& line : ckpt.metric_history) out << "h " << line << '\n';
    std::istringstream config_lines(ckpt.config.canonical_text());
    std::vector<std::string> lines;
    for (std::string line; std::getline(config_lines, line);) lines.push_back(line);
    out << "config_lines " << lines.size() << '\n';
    for (const std::string& line : lines) out << line << '\n';
    out << "tensors " << refs.size() << '\n';
    for (const TensorRef& r : refs) {
        out << "tensor " << r.name << ' ' << r.shape.size();
        for (int d : r.shape) out << ' ' << d;
        out << ' ' << r.offset << '\n';
    }
    out << "payload " << offset << '\n';
    for (const TensorRef& r : refs) write_f32_le(out, r.data, r.count);
    if (!out) throw DataError("save_checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, const Config* expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_checkpoint: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw DataError("load_checkpoint: '" + path + "' has an unsupported format version");
    }
    auto expect_key = [&](const std::string& key) {
        if (!std::getline(in, line)) {
            throw DataError("load_checkpoint: '" + path + "' is corrupt: missing " + key);
        }
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != key) {
            throw DataError("load_checkpoint: '" + path + "' is corrupt: expected " + key);
        }
        return ss;
    };

    Checkpoint ckpt;
    uint64_t stored_hash = 0;
    {
        std::istringstream ss = expect_key("config_hash");
        ss >> stored_hash;
    }
    {
        std::istringstream ss = expect_key("epoch");
        ss >> ckpt.epoch;
    }
    long opt_step = 0;
    {
        std::istringstream ss = expect_key("opt_step");
        ss >> opt_step;
    }
    size_t history_count = 0;
    {
        std::istringstream ss = expect_key("history");
        ss >> history_count;
    }
    for (size_t i = 0; i < history_count; ++i) {
        if (!std::getline(in, line) || line.rfind("h ", 0) != 0) {
            throw DataError("load_checkpoint: '" + path + "' is corrupt: bad history line");
        }
        ckpt.metric_history.push_back(line.substr(2));
    }
    size_t config_line_count = 0;
    {
        std::istringstream ss = expect_key("config_lines");
        ss >> config_line_count;
    }
    std::ostringstream config_text;
    for (size_t i = 0; i < config_line_count; ++i) {
        if (!std::getline(in, line)) {
            throw DataError("load_checkpoint: '" + path + "' is corrupt: bad config block");
        }
        config_text << line << '\n';
    }
    ckpt.config = Config::defaults();
    ckpt.config.load_text(config_text.str(), path);
    if (ckpt.config.hash() != stored_hash) {
        throw DataError("load_checkpoint: '" + path + "' is corrupt: config hash mismatch");
    }
    if (expected && expected->hash() != stored_hash) {
        throw DataError("load_checkpoint: refusing '" + path +
                        "': checkpoint config does not match the requested config");
    }

    size_t tensor_count = 0;
    {
        std::istringstream ss = expect_key("tensors");
        ss >> tensor_count;
    }
    std::vector<TensorRef> refs(tensor_count);
    for (TensorRef& r : refs) {
        std::istringstream ss = expect_key("tensor");
        size_t ndims = 0;
        ss >> r.name >> ndims;
        r.shape.resize(ndims);
        r.count = 1;
        for (size_t d = 0; d < ndims; ++d) {
            ss >> r.shape[d];
            r.count *= static_cast<size_t>(r.shape[d]);
        }
        ss >> r.offset;
        if (!ss) throw DataError("load_checkpoint: '" + path + "' is corrupt: bad tensor line");
    }
    size_t payload_count = 0;
    {
        std::istringstream ss = expect_key("payload");
        ss >> payload_count;
    }
    const std::vector<float> payload = read_f32_le(in, payload_count, path);

    auto tensor_by_name = [&](const std::string& name) -> const TensorRef& {
        for (const TensorRef& r : refs) {
            if (r.name == name) return r;
        }
        throw DataError("load_checkpoint: '" + path + "' is missing tensor '" + name + "'");
    };
    auto slice = [&](const TensorRef& r) {
        if (r.offset + r.count > payload.size()) {
            throw DataError("load_checkpoint: '" + path + "' is corrupt: tensor '" + r.name +
                            "' overruns payload");
        }
        return payload.data() + r.offset;
    };

    const TrainConfig cfg = train_config_from(ckpt.config);
    const TensorRef& user_ref = tensor_by_name("user_emb");
    const TensorRef& item_ref = tensor_by_name("item_emb");
    const int num_users = user_ref.shape.at(0);
    const int num_items = item_ref.shape.at(0);

    std::vector<Mat> metadata;
    for (int c = 0; c < cfg.num_channels; ++c) {
        const TensorRef& r = tensor_by_name("c" + std::to_string(c) + ".metadata");
        const float* data = slice(r);
        Mat m(r.shape.at(0), r.shape.at(1));
        for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = static_cast<double>(data[i]);
        metadata.push_back(std::move(m));
    }

    ckpt.model = Model::build(cfg, num_users, num_items, std::move(metadata));
    const std::vector<ParamTensor*> params = ckpt.model.trainable_params();
    for (ParamTensor* p : params) {
        const TensorRef& r = tensor_by_name(p->name);
        if (r.shape != p->shape) {
            throw DataError("load_checkpoint: '" + path + "' tensor '" + p->name +
                            "' has unexpected shape");
        }
        const float* data = slice(r);
        std::copy(data, data + r.count, p->values.begin());
    }

    ckpt.opt.kind = cfg.optimizer;
    ckpt.opt.learning_rate = cfg.learning_rate;
    ckpt.opt.weight_decay = cfg.weight_decay;
    ckpt.opt.attach(params);
    ckpt.opt.step_count = opt_step;
    auto has_tensor = [&](const std::string& name) {
        for (const TensorRef& r : refs) {
            if (r.name == name) return true;
        }
        return false;
    };
    for (size_t k = 0; k < params.size(); ++k) {
        if (!has_tensor("opt.m." + params[k]->name)) continue;  // saved without moments
        const TensorRef& rm = tensor_by_name("opt.m." + params[k]->name);
        const TensorRef& rv = tensor_by_name("opt.v." + params[k]->name);
        if (rm.count != params[k]->size() || rv.count != params[k]->size()) {
            throw DataError("load_checkpoint: '" + path + "' moment size mismatch for '" +
                            params[k]->name + "'");
        }
        const float* dm = slice(rm);
        const float* dv = slice(rv);
        std::copy(dm, dm + rm.count, ckpt.opt.first_moment[k].begin());
        std::copy(dv, dv + rv.count, ckpt.opt.second_moment[k].begin());
    }
    return ckpt;
}

}  // namespace infodcl
