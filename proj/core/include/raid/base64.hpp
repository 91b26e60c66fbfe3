#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raid::base64 {

/// Standard alphabet with '=' padding.
std::string encode(std::span<const std::uint8_t> bytes);
/// Throws Parse on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace raid::base64
