#include "morphorank/config.hpp"

namespace morphorank {

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

std::string KeyValueConfig::require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    auto v = parse_long(it->second);
    if (!v) throw ConfigError("config key " + key + " is not an integer: " + it->second);
    return *v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    auto v = parse_double(it->second);
    if (!v) throw ConfigError("config key " + key + " is not a number: " + it->second);
    return *v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second == "1" || it->second == "true") return true;
    if (it->second == "0" || it->second == "false") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + it->second);
}

uint64_t KeyValueConfig::digest() const {
    uint64_t h = kFnvOffset;
    for (const auto& [k, v] : values) {
        h = fnv1a(k, h);
        h = fnv1a("=", h);
        h = fnv1a(v, h);
        h = fnv1a("\n", h);
    }
    return h;
}

KeyValueConfig load_config(const std::filesystem::path& path) {
    KeyValueConfig config;
    for (const auto& raw : read_lines(path)) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path.string() + ": expected key = value, got: " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path.string() + ": empty key in line: " + line);
        config.values[key] = value;
    }
    return config;
}

void apply_override(KeyValueConfig& config, const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got: " + assignment);
    config.values[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

}  // namespace morphorank
