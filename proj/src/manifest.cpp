#include "ligo/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "ligo/errors.hpp"

namespace ligo {

std::string fnv1a64_hex(const void* data, std::size_t n) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot hash missing file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return fnv1a64_hex(bytes.data(), bytes.size());
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
    std::filesystem::path p = output;
    p.replace_extension(); // drop .ckpt / .csv
    p += ".manifest.json";
    return p;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::json j{{"command_line", m.command_line},
                     {"tool_version", m.tool_version},
                     {"created_utc", m.created_utc},
                     {"hash_algorithm", "fnv1a64"},
                     {"resolved_config", m.resolved_config},
                     {"input_hashes", m.input_hashes},
                     {"outputs", m.outputs}};
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error("cannot write manifest: " + path.string());
    f << j.dump(2) << "\n";
}

} // namespace ligo
