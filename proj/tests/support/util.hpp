#pragma once
// Test helpers: fixture location, scratch directories, tiny file writer.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace morphorank::testutil {

inline std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("MORPHORANK_FIXTURE")) return env;
    return std::filesystem::path(__FILE__).parent_path().parent_path().parent_path() / "data" / "fixture";
}

inline std::string cli_binary() {
    if (const char* env = std::getenv("MORPHORANK_BIN")) return env;
    return "";
}

// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("morphorank_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::filesystem::path file(const std::string& name, const std::string& content) const {
        auto p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }
};

}  // namespace morphorank::testutil
