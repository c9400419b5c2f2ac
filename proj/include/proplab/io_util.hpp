#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace proplab {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Atomic text-file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// FNV-1a hash of a file's bytes, as a fixed-width hex string.
std::string file_hash(const std::filesystem::path& path);

/// Run manifest: enough to bit-reproduce a CLI run. Written next to each
/// output as <output>.manifest.json.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> hash
    std::vector<std::string> outputs;
    std::uint64_t rng_seed = 0;
    std::string config_json;  ///< snapshot of the effective configuration

    void write(const std::filesystem::path& path) const;
};

}  // namespace proplab
