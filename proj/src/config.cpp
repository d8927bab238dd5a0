#include "infodcl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace infodcl {

Config Config::defaults() {
    Config c;
    auto& v = c.values_;
    v["data.path"] = "";
    v["data.delimiter"] = "auto";
    v["data.split_train"] = "0.8";
    v["data.split_valid"] = "0.1";
    v["data.split_test"] = "0.1";
    v["data.seed"] = "13";

    v["metadata.k"] = "10";
    v["metadata.pretrain_layers"] = "2";
    v["metadata.pretrain_epochs"] = "20";
    v["metadata.pretrain_lr"] = "0.005";
    v["metadata.pretrain_batch"] = "1024";
    v["metadata.seed"] = "101";
    v["metadata.channel1_file"] = "";
    v["metadata.channel2_file"] = "";

    v["psnet.rank"] = "8";
    v["psnet.ln_eps"] = "1e-5";

    v["diffusion.steps"] = "200";
    v["diffusion.beta_first"] = "1e-4";
    v["diffusion.beta_last"] = "0.02";
    v["diffusion.time_embed_dim"] = "16";

    v["objectives.tau"] = "0.2";
    v["objectives.lambda_bpr"] = "0.7";
    v["objectives.lambda_con"] = "0.005";
    v["objectives.lambda_bal"] = "0.001";
    v["objectives.lambda_reg"] = "0.005";

    v["trainer.dim"] = "64";
    v["trainer.batch"] = "1024";
    v["trainer.epochs"] = "100";
    v["trainer.lr"] = "0.001";
    v["trainer.optimizer"] = "adam";
    v["trainer.weight_decay"] = "0";
    v["trainer.channels"] = "1";
    v["trainer.variant"] = "full";
    v["trainer.seed"] = "7";
    v["trainer.patience"] = "20";
    v["trainer.eval_every"] = "1";

    v["eval.gcn_layers"] = "2";
    v["eval.cutoffs"] = "20,50";

    v["analysis.snr_samples"] = "1000";
    v["analysis.theorem_samples"] = "10000";
    v["analysis.reverse_chain"] = "false";
    v["analysis.reverse_steps"] = "20";
    v["analysis.spectral_batches"] = "32";
    v["analysis.spectral_batch_size"] = "128";
    v["analysis.seed"] = "29";
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int Config::get_int(const std::string& key) const {
    return static_cast<int>(get_long(key));
}

long Config::get_long(const std::string& key) const {
    const std::string& s = get(key);
    try {
        size_t pos = 0;
        const long x = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
    }
}

double Config::get_double(const std::string& key) const {
    const std::string& s = get(key);
    try {
        size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + s + "' is not a number");
    }
}

bool Config::get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    const std::string& s = get(key);
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': '" + tok + "' is not an integer");
        }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void Config::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!section.empty() && key.find('.') == std::string::npos) {
            key = section + "." + key;
        }
        set(key, value);
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
}

std::string Config::canonical_text() const {
    std::ostringstream out;
    std::string section;
    for (const auto& [key, value] : values_) {
        const size_t dot = key.find('.');
        const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        if (sec != section) {
            section = sec;
            out << "[" << section << "]\n";
        }
        out << key.substr(dot + 1) << " = " << value << "\n";
    }
    return out.str();
}

uint64_t Config::hash() const { return fnv1a(canonical_text()); }

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [key, value] : values_) out.push_back(key);
    return out;
}

}  // namespace infodcl
