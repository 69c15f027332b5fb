#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace ligo {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility sidecar written before a command starts producing
/// outputs. Output files reference it by the naming convention
/// <output stem>.manifest.json; checkpoints additionally embed its path.
struct RunManifest {
    std::string command_line;
    std::string tool_version = kToolVersion;
    std::string created_utc;
    nlohmann::json resolved_config; // fully resolved values incl. seeds
    std::map<std::string, std::string> input_hashes; // path -> fnv1a64 of content
    std::vector<std::string> outputs;
};

std::string fnv1a64_hex(const void* data, std::size_t n);
std::string hash_file(const std::filesystem::path& path);
std::string utc_timestamp();
std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

} // namespace ligo
