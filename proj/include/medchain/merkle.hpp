#pragma once

#include <span>
#include <vector>

#include "medchain/digest.hpp"

namespace medchain {

/// Binary Merkle root over the given leaf digests.
/// Rules: empty sequence -> hash of the empty string; a single leaf is hashed
/// once more (root = H(leaf)); an odd-width level duplicates its last node.
Digest256 merkle_root(std::span<const Digest256> leaves);

}  // namespace medchain
