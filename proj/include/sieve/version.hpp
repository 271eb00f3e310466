#pragma once

namespace sieve {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sieve
