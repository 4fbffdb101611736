#pragma once
// Flat key = value configuration files, CLI --set overrides, and the
// content digest that names run directories.

#include <map>
#include <string>

#include "morphorank/common.hpp"

namespace morphorank {

struct KeyValueConfig {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    std::string require(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    void set(const std::string& key, const std::string& value) { values[key] = value; }

    // Digest over sorted key=value lines; names the run directory.
    uint64_t digest() const;
};

KeyValueConfig load_config(const std::filesystem::path& path);

// "key=value" as accepted by --set
void apply_override(KeyValueConfig& config, const std::string& assignment);

}  // namespace morphorank
