#pragma once

#include <map>
#include <string>
#include <vector>

#include "infodcl/common.hpp"

namespace infodcl {

// Flat "section.key = value" configuration with a fixed key registry.
// Unknown keys are rejected; every key has a printable default.
class Config {
public:
    static Config defaults();

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    long get_long(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    // INI-style file: [section] headers plus key = value lines; '#' comments.
    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin);

    std::string canonical_text() const;
    uint64_t hash() const;
    std::vector<std::string> keys() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace infodcl
