#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sieve {

// Provenance record written alongside every output file. Two runs whose
// manifests match (ignoring the timestamp) produce byte-identical outputs.
struct RunManifest {
    std::string command;
    std::string version;
    std::string timestamp;  // ISO 8601 UTC
    std::optional<std::uint64_t> seed;
    std::vector<std::pair<std::string, std::string>> parameters;  // key, value
    std::vector<std::pair<std::string, std::string>> inputs;      // path, sha256
    std::vector<std::string> outputs;
};

std::string manifest_to_json(const RunManifest& m);

// Current UTC time as ISO 8601.
std::string utc_timestamp();

// Records the file's digest into the manifest and returns its contents.
std::string read_input(RunManifest& m, const std::filesystem::path& path);

}  // namespace sieve
