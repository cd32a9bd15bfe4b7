#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

namespace requery::testdata {

// Set by CMake to the absolute tests/ directory of the source tree.
#ifndef REQUERY_TEST_DIR
#error "REQUERY_TEST_DIR must be defined by the build"
#endif

inline std::filesystem::path tests_dir() { return std::filesystem::path(REQUERY_TEST_DIR); }

inline std::filesystem::path mini_ddl_dir() { return tests_dir() / "data" / "ddl" / "mini"; }
inline std::filesystem::path catalog50_dir() { return tests_dir() / "data" / "ddl" / "catalog50"; }
inline std::filesystem::path vectors_path() {
    return tests_dir() / "data" / "vectors" / "catalog_tokens.vec";
}
inline std::filesystem::path sample_fixtures_path() {
    return tests_dir() / "fixtures" / "sample_queries.jsonl";
}

// Scratch location for tests that write files.
inline std::filesystem::path temp_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / ("requery_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace requery::testdata
