#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace phiscan {

/// Lowercase hex sha-256 of the given bytes.
std::string sha256_hex(std::span<const std::uint8_t> data);

}  // namespace phiscan
