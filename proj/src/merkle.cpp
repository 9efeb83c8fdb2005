#include "medchain/merkle.hpp"

namespace medchain {

namespace {
Digest256 hash_pair(const Digest256& l, const Digest256& r) {
    std::array<std::uint8_t, 64> cat;
    std::copy(l.bytes.begin(), l.bytes.end(), cat.begin());
    std::copy(r.bytes.begin(), r.bytes.end(), cat.begin() + 32);
    return hash_bytes(std::span<const std::uint8_t>(cat));
}
}  // namespace

Digest256 merkle_root(std::span<const Digest256> leaves) {
    if (leaves.empty()) return hash_bytes(std::string_view{});
    if (leaves.size() == 1) return hash_bytes(leaves[0].bytes);

    std::vector<Digest256> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<Digest256> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2)
            next.push_back(hash_pair(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level[0];
}

}  // namespace medchain
