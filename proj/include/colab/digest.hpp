#pragma once

#include <string>
#include <string_view>

namespace colab {

/// Hex-encoded SHA-256 of the exact byte sequence. Used for fixture keys and
/// config digests.
std::string sha256_hex(std::string_view bytes);

} // namespace colab
