#include "sieve/manifest.hpp"

#include <ctime>

#include <json.hpp>

#include "sieve/io_util.hpp"
#include "sieve/sha256.hpp"

namespace sieve {

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::ordered_json doc;
    doc["command"] = m.command;
    doc["version"] = m.version;
    doc["timestamp"] = m.timestamp;
    if (m.seed) {
        doc["seed"] = *m.seed;
    }
    nlohmann::ordered_json params;
    for (const auto& [key, value] : m.parameters) params[key] = value;
    doc["parameters"] = std::move(params);
    auto inputs = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : m.inputs) {
        nlohmann::ordered_json entry;
        entry["path"] = path;
        entry["sha256"] = digest;
        inputs.push_back(std::move(entry));
    }
    doc["inputs"] = std::move(inputs);
    doc["outputs"] = m.outputs;
    return doc.dump(2) + "\n";
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string read_input(RunManifest& m, const std::filesystem::path& path) {
    std::string contents = read_file(path);
    m.inputs.emplace_back(path.string(), sha256_hex(contents));
    return contents;
}

}  // namespace sieve
