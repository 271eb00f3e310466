#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sieve/types.hpp"

namespace sieve {

// Ingestion validates hard errors (syntax, raw upper < lower, duplicate
// (instance, annotator) pairs, dangling instance ids) and canonicalizes
// ordering. Raw values slightly outside the scale are clamped; each clamp is
// reported through `warnings` when given.

Dataset ingest_json(std::string_view text, std::vector<std::string>* warnings = nullptr);

// CSV annotations (`condition,instance,annotator,lower,upper`) plus a sidecar
// JSON object carrying the scale and instance list.
Dataset ingest_csv(std::string_view annotations_csv, std::string_view sidecar_json,
                   std::vector<std::string>* warnings = nullptr);

// Dispatch on file extension: .json, or .csv with a sidecar path.
Dataset ingest_file(const std::filesystem::path& path,
                    const std::optional<std::filesystem::path>& sidecar = std::nullopt,
                    std::vector<std::string>* warnings = nullptr);

// Serializers emit raw-scale units and canonical ordering, so
// ingest(serialize(d)) == d.
std::string dataset_to_json(const Dataset& d);
std::string dataset_to_csv(const Dataset& d);
std::string dataset_to_sidecar_json(const Dataset& d);

}  // namespace sieve
