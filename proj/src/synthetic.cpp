#include "infodcl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

namespace infodcl {

std::vector<std::pair<std::string, std::string>> synth_interactions(const SyntheticSpec& spec) {
    if (spec.num_users < 1 || spec.num_items < 1 || spec.num_clusters < 1) {
        throw ConfigError("synth_interactions: counts must be positive");
    }
    Rng rng(mix_seed(spec.seed, 0x57a7));

    std::vector<int> user_cluster(spec.num_users);
    std::vector<std::vector<int>> cluster_items(spec.num_clusters);
    for (int u = 0; u < spec.num_users; ++u) user_cluster[u] = rng.uniform_int(spec.num_clusters);
    for (int i = 0; i < spec.num_items; ++i) {
        cluster_items[rng.uniform_int(spec.num_clusters)].push_back(i);
    }
    for (auto& items : cluster_items) {
        if (items.empty()) items.push_back(rng.uniform_int(spec.num_items));
    }

    // zipf-weighted cumulative tables per cluster
    std::vector<std::vector<double>> cluster_cdf(spec.num_clusters);
    for (int c = 0; c < spec.num_clusters; ++c) {
        double acc = 0.0;
        cluster_cdf[c].reserve(cluster_items[c].size());
        for (size_t r = 0; r < cluster_items[c].size(); ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), spec.popularity_skew);
            cluster_cdf[c].push_back(acc);
        }
    }
    auto draw_item = [&](int cluster) {
        const std::vector<double>& cdf = cluster_cdf[cluster];
        const double x = rng.uniform() * cdf.back();
        const size_t idx = std::lower_bound(cdf.begin(), cdf.end(), x) - cdf.begin();
        return cluster_items[cluster][std::min(idx, cdf.size() - 1)];
    };

    std::vector<std::pair<std::string, std::string>> pairs;
    std::unordered_set<uint64_t> seen;
    auto add = [&](int u, int i) {
        const uint64_t key = (static_cast<uint64_t>(u) << 32) | static_cast<uint32_t>(i);
        if (!seen.insert(key).second) return false;
        pairs.emplace_back("u" + std::to_string(u), "i" + std::to_string(i));
        return true;
    };

    for (int u = 0; u < spec.num_users; ++u) {
        // lognormal-ish spread of user activity around the configured mean
        const double g = rng.gaussian();
        int count = static_cast<int>(spec.mean_per_user * std::exp(0.8 * g - 0.32));
        count = std::clamp(count, spec.min_per_user, spec.max_per_user);
        int added = 0;
        int guard = 0;
        while (added < count && guard < 50 * count) {
            ++guard;
            const bool inside = rng.uniform() < spec.in_cluster_prob;
            const int cluster =
                inside ? user_cluster[u] : rng.uniform_int(spec.num_clusters);
            if (add(u, draw_item(cluster))) ++added;
        }
    }
    // every item gets at least one interaction
    for (int i = 0; i < spec.num_items; ++i) {
        add(rng.uniform_int(spec.num_users), i);
    }
    return pairs;
}

void write_interactions_file(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& pairs,
                             const std::string& delimiter) {
    std::ofstream out(path);
    if (!out) throw DataError("write_interactions_file: cannot write '" + path + "'");
    for (const auto& [u, i] : pairs) out << u << delimiter << i << '\n';
}

InteractionDataset synth_dataset(const SyntheticSpec& spec, double r_train, double r_valid,
                                 double r_test) {
    const auto pairs = synth_interactions(spec);
    InteractionDataset ds;
    std::unordered_map<std::string, int> users, items;
    for (const auto& [u, i] : pairs) {
        auto [uit, uins] = users.try_emplace(u, ds.num_users);
        if (uins) {
            ds.user_ids.push_back(u);
            ++ds.num_users;
        }
        auto [iit, iins] = items.try_emplace(i, ds.num_items);
        if (iins) {
            ds.item_ids.push_back(i);
            ++ds.num_items;
        }
        ds.train.emplace_back(uit->second, iit->second);
    }
    ds.rebuild_index();
    return split_dataset(std::move(ds), r_train, r_valid, r_test, mix_seed(spec.seed, 0x511));
}

}  // namespace infodcl
