#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace memchaos {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// 64-bit FNV-1a over raw bytes; stable across platforms with the same endianness.
std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

}  // namespace memchaos
