#include "proplab/io_util.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace proplab {

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + path.string());
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash file: " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << h;
    return os.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["tool"] = "proplab";
    j["version"] = "0.1.0";
    j["command"] = command;
    j["argv"] = argv;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    for (const auto& [p, h] : input_hashes) inputs[p] = h;
    j["inputs"] = std::move(inputs);
    j["outputs"] = outputs;
    j["rng_seed"] = rng_seed;
    j["config"] = config_json.empty() ? nlohmann::ordered_json::object()
                                      : nlohmann::ordered_json::parse(config_json);
    write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace proplab
