#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace sppl {

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t value);

/// Stable content hash of a byte string, formatted as "fnv1a64:<16 hex digits>".
std::string content_hash(std::string_view data);

/// Content hash of a file's bytes. Throws ArtifactError if the file is unreadable.
std::string hash_file(const std::filesystem::path& path);

/// Mixes a numeric seed with a string key into a 64-bit stream seed.
/// Same (seed, key) always yields the same value, on any platform.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key);

} // namespace sppl
