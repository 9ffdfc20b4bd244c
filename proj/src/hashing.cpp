#include "sppl/hashing.hpp"

#include <fstream>
#include <sstream>

#include "sppl/errors.hpp"

namespace sppl {

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string content_hash(std::string_view data) {
    return "fnv1a64:" + hex64(fnv1a64(data));
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArtifactError("cannot read file for hashing: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return content_hash(buf.str());
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view key) {
    // splitmix64 over the seed, xored with the key hash, then finalized again
    auto splitmix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    };
    return splitmix(splitmix(seed) ^ fnv1a64(key));
}

} // namespace sppl
