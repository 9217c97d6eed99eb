// FNV-1a content hashing for config snapshots and the run manifest.
#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace eitmem {

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ULL)
{
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex64(std::uint64_t value)
{
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

inline std::string hash_string(const std::string& text)
{
    return to_hex64(fnv1a64(text.data(), text.size()));
}

inline std::string hash_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("hash_file: cannot open " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buffer[65536];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0)
        h = fnv1a64(buffer, static_cast<std::size_t>(in.gcount()), h);
    return to_hex64(h);
}

} // namespace eitmem
