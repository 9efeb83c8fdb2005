#include "medchain/digest.hpp"

#include <openssl/sha.h>

namespace medchain {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}
}  // namespace

Digest256 hash_bytes(std::span<const std::uint8_t> data) {
    Digest256 out;
    SHA256(data.data(), data.size(), out.bytes.data());
    return out;
}

Digest256 hash_bytes(std::string_view data) {
    return hash_bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string Digest256::hex() const {
    return hex_encode(bytes);
}

std::optional<Digest256> Digest256::from_hex(std::string_view hex) {
    auto raw = hex_decode(hex);
    if (!raw || raw->size() != 32) return std::nullopt;
    Digest256 d;
    std::copy(raw->begin(), raw->end(), d.bytes.begin());
    return d;
}

std::string hex_encode(std::span<const std::uint8_t> data) {
    std::string s;
    s.reserve(data.size() * 2);
    for (auto b : data) {
        s.push_back(kHexDigits[b >> 4]);
        s.push_back(kHexDigits[b & 0xf]);
    }
    return s;
}

std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

}  // namespace medchain
