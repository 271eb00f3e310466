#pragma once

#include <string>
#include <string_view>

namespace sieve {

// Hex digest of the input bytes; used for input fingerprints in run manifests.
std::string sha256_hex(std::string_view data);

}  // namespace sieve
