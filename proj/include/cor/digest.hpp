#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cor::digest {

// Lowercase hex SHA-256 of `data`.
[[nodiscard]] std::string sha256_hex(std::string_view data);

// Git blob object id: SHA-1 over "blob <size>\0" + content.
[[nodiscard]] std::string git_blob_id(std::string_view content);
[[nodiscard]] std::string git_blob_id_of_file(const std::filesystem::path& path);

// Stable 64-bit FNV-1a; used to derive per-item RNG seeds.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view data,
                                              std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept {
    std::uint64_t h = seed;
    for (const char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace cor::digest
