#include "infodcl/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace infodcl {

double InteractionDataset::sparsity() const {
    if (num_users == 0 || num_items == 0) return 0.0;
    const double cells = static_cast<double>(num_users) * num_items;
    return 1.0 - static_cast<double>(total_interactions()) / cells;
}

bool InteractionDataset::user_has_train_item(int user, int item) const {
    const std::vector<int>& items = user_train_items[user];
    return std::binary_search(items.begin(), items.end(), item);
}

void InteractionDataset::rebuild_index() {
    user_train_items.assign(num_users, {});
    item_train_users.assign(num_items, {});
    user_valid_items.assign(num_users, {});
    user_test_items.assign(num_users, {});
    for (const auto& [u, i] : train) {
        user_train_items[u].push_back(i);
        item_train_users[i].push_back(u);
    }
    for (const auto& [u, i] : valid) user_valid_items[u].push_back(i);
    for (const auto& [u, i] : test) user_test_items[u].push_back(i);
    for (auto& v : user_train_items) std::sort(v.begin(), v.end());
    for (auto& v : item_train_users) std::sort(v.begin(), v.end());
    for (auto& v : user_valid_items) std::sort(v.begin(), v.end());
    for (auto& v : user_test_items) std::sort(v.begin(), v.end());
}

void InteractionDataset::check_invariants() const {
    auto in_range = [&](const std::vector<std::pair<int, int>>& edges) {
        for (const auto& [u, i] : edges) {
            if (u < 0 || u >= num_users || i < 0 || i >= num_items) {
                throw DataError("dataset: index out of range");
            }
        }
    };
    in_range(train);
    in_range(valid);
    in_range(test);
    for (int u = 0; u < num_users; ++u) {
        if ((!user_valid_items[u].empty() || !user_test_items[u].empty()) &&
            user_train_items[u].empty()) {
            throw DataError("dataset: user " + std::to_string(u) +
                            " has held-out items but no train items");
        }
        for (int i : user_test_items[u]) {
            if (user_has_train_item(u, i)) {
                throw DataError("dataset: train/test overlap at user " + std::to_string(u));
            }
        }
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& delim) {
    std::vector<std::string> fields;
    if (delim == "auto" || delim == "ws") {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) fields.push_back(tok);
        return fields;
    }
    size_t pos = 0;
    while (pos <= line.size()) {
        const size_t next = line.find(delim, pos);
        if (next == std::string::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, next - pos));
        pos = next + delim.size();
    }
    return fields;
}

std::string detect_delimiter(const std::string& line) {
    if (line.find("::") != std::string::npos) return "::";
    if (line.find('\t') != std::string::npos) return "\t";
    if (line.find(',') != std::string::npos) return ",";
    return "ws";
}

}  // namespace

InteractionDataset load_interactions(const std::string& path, const LoadFormat& fmt) {
    std::ifstream in(path);
    if (!in) throw DataError("load_interactions: cannot open '" + path + "'");

    InteractionDataset ds;
    std::unordered_map<std::string, int> user_index;
    std::unordered_map<std::string, int> item_index;
    std::unordered_set<uint64_t> seen;
    std::string line;
    std::string delim = fmt.delimiter;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (delim == "auto") delim = detect_delimiter(line);
        const std::vector<std::string> fields = split_line(line, delim);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            throw DataError("load_interactions: unparseable line " + std::to_string(line_no) +
                            " in '" + path + "'");
        }
        auto [uit, uinserted] = user_index.try_emplace(fields[0], ds.num_users);
        if (uinserted) {
            ds.user_ids.push_back(fields[0]);
            ++ds.num_users;
        }
        auto [iit, iinserted] = item_index.try_emplace(fields[1], ds.num_items);
        if (iinserted) {
            ds.item_ids.push_back(fields[1]);
            ++ds.num_items;
        }
        const uint64_t key =
            (static_cast<uint64_t>(uit->second) << 32) | static_cast<uint32_t>(iit->second);
        if (seen.insert(key).second) {
            ds.train.emplace_back(uit->second, iit->second);
        }
    }
    if (ds.train.empty()) throw DataError("load_interactions: no interactions in '" + path + "'");
    ds.rebuild_index();
    return ds;
}

InteractionDataset split_dataset(InteractionDataset ds, double r_train, double r_valid,
                                 double r_test, uint64_t seed) {
    if (r_train <= 0.0 || r_valid < 0.0 || r_test < 0.0 ||
        std::fabs(r_train + r_valid + r_test - 1.0) > 1e-9) {
        throw ConfigError("split_dataset: ratios must be positive and sum to 1");
    }
    std::vector<std::pair<int, int>> all;
    all.reserve(ds.total_interactions());
    for (const auto& e : ds.train) all.push_back(e);
    for (const auto& e : ds.valid) all.push_back(e);
    for (const auto& e : ds.test) all.push_back(e);

    std::vector<std::vector<int>> per_user(ds.num_users);
    for (const auto& [u, i] : all) per_user[u].push_back(i);

    ds.train.clear();
    ds.valid.clear();
    ds.test.clear();
    Rng rng(mix_seed(seed, 0x5eed));
    for (int u = 0; u < ds.num_users; ++u) {
        std::vector<int>& items = per_user[u];
        const int n = static_cast<int>(items.size());
        if (n == 0) continue;
        for (int i = n - 1; i > 0; --i) {
            std::swap(items[i], items[rng.uniform_int(i + 1)]);
        }
        int n_valid = static_cast<int>(std::floor(n * r_valid));
        int n_test = static_cast<int>(std::floor(n * r_test));
        if (n - n_valid - n_test < 1) {
            // single-interaction users (and extreme ratios) keep train non-empty
            n_valid = std::min(n_valid, n - 1);
            n_test = std::min(n_test, n - 1 - n_valid);
        }
        int idx = 0;
        for (int k = 0; k < n - n_valid - n_test; ++k) ds.train.emplace_back(u, items[idx++]);
        for (int k = 0; k < n_valid; ++k) ds.valid.emplace_back(u, items[idx++]);
        for (int k = 0; k < n_test; ++k) ds.test.emplace_back(u, items[idx++]);
    }
    ds.rebuild_index();
    ds.check_invariants();
    return ds;
}

NormalizedAdjacency build_normalized_adjacency(const InteractionDataset& ds) {
    if (ds.train.empty()) throw DataError("build_normalized_adjacency: empty train split");
    NormalizedAdjacency adj;
    adj.num_users = ds.num_users;
    adj.num_items = ds.num_items;
    adj.entries.reserve(ds.train.size());
    for (const auto& [u, i] : ds.train) {
        const double du = static_cast<double>(ds.user_train_items[u].size());
        const double di = static_cast<double>(ds.item_train_users[i].size());
        adj.entries.push_back({u, i, 1.0 / std::sqrt(du * di)});
    }
    return adj;
}

std::vector<BprTriple> sample_bpr_triples(const InteractionDataset& ds, int batch_size,
                                          Rng& rng) {
    if (ds.train.empty()) throw DataError("sample_bpr_triples: empty train split");
    std::vector<BprTriple> out;
    out.reserve(static_cast<size_t>(std::max(batch_size, 0)));
    while (static_cast<int>(out.size()) < batch_size) {
        const int u = rng.uniform_int(ds.num_users);
        const std::vector<int>& pos_items = ds.user_train_items[u];
        if (pos_items.empty() || static_cast<int>(pos_items.size()) == ds.num_items) {
            continue;  // no positives, or no possible negative: pick another user
        }
        const int pos = pos_items[rng.uniform_int(static_cast<int>(pos_items.size()))];
        int neg = rng.uniform_int(ds.num_items);
        while (ds.user_has_train_item(u, neg)) neg = rng.uniform_int(ds.num_items);
        out.push_back({u, pos, neg});
    }
    return out;
}

namespace {

void write_edges(const std::string& path, const std::vector<std::pair<int, int>>& edges) {
    std::ofstream out(path);
    if (!out) throw DataError("save_processed: cannot write '" + path + "'");
    for (const auto& [u, i] : edges) out << u << '\t' << i << '\n';
}

std::vector<std::pair<int, int>> read_edges(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_processed: cannot open '" + path + "'");
    std::vector<std::pair<int, int>> edges;
    int u = 0, i = 0;
    while (in >> u >> i) edges.emplace_back(u, i);
    return edges;
}

void write_ids(const std::string& path, const std::vector<std::string>& ids) {
    std::ofstream out(path);
    if (!out) throw DataError("save_processed: cannot write '" + path + "'");
    for (size_t k = 0; k < ids.size(); ++k) out << k << '\t' << ids[k] << '\n';
}

std::vector<std::string> read_ids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_processed: cannot open '" + path + "'");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t tab = line.find('\t');
        if (tab == std::string::npos) throw DataError("load_processed: bad id map line");
        ids.push_back(line.substr(tab + 1));
    }
    return ids;
}

}  // namespace

void save_processed(const InteractionDataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_edges(dir + "/train.txt", ds.train);
    write_edges(dir + "/valid.txt", ds.valid);
    write_edges(dir + "/test.txt", ds.test);
    write_ids(dir + "/user_map.txt", ds.user_ids);
    write_ids(dir + "/item_map.txt", ds.item_ids);
    std::ofstream stats(dir + "/stats.txt");
    stats << "num_users\t" << ds.num_users << '\n'
          << "num_items\t" << ds.num_items << '\n'
          << "interactions\t" << ds.total_interactions() << '\n'
          << "sparsity\t" << ds.sparsity() << '\n';
}

InteractionDataset load_processed(const std::string& dir) {
    InteractionDataset ds;
    ds.user_ids = read_ids(dir + "/user_map.txt");
    ds.item_ids = read_ids(dir + "/item_map.txt");
    ds.num_users = static_cast<int>(ds.user_ids.size());
    ds.num_items = static_cast<int>(ds.item_ids.size());
    ds.train = read_edges(dir + "/train.txt");
    ds.valid = read_edges(dir + "/valid.txt");
    ds.test = read_edges(dir + "/test.txt");
    if (ds.train.empty()) throw DataError("load_processed: empty train split in '" + dir + "'");
    ds.rebuild_index();
    ds.check_invariants();
    return ds;
}

}  // namespace infodcl
