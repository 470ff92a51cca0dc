#include "memchaos/io.hpp"

#include <fmt/format.h>

namespace memchaos {

std::string format_number(double value) {
    if (value == 0.0) return "0";  // collapses -0
    return fmt::format("{}", value);
}

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t seed) {
    std::uint64_t hash = seed;
    for (std::byte b : bytes) {
        hash ^= static_cast<std::uint64_t>(b);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

}  // namespace memchaos
