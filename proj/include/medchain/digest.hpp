#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medchain {

/// 32-byte SHA-256 digest. Hex form is always lowercase, 64 chars.
struct Digest256 {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Digest256&) const = default;

    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }

    std::string hex() const;
    static std::optional<Digest256> from_hex(std::string_view hex);
};

/// SHA-256 of the input bytes. Pure; empty input allowed.
Digest256 hash_bytes(std::span<const std::uint8_t> data);
Digest256 hash_bytes(std::string_view data);

/// Strict lowercase hex. Returns nothing on any non-[0-9a-f] char or odd length.
std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view hex);
std::string hex_encode(std::span<const std::uint8_t> data);

}  // namespace medchain
