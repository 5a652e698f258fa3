#pragma once

#include <lo/bytes.hpp>

#include <string_view>

namespace lo {

Hash256 sha256(std::span<const uint8_t> data);

/// Domain-separated hash: SHA256(SHA256(tag) || SHA256(tag) || data).
Hash256 tagged_hash(std::string_view tag, std::span<const uint8_t> data);

/// Fast non-cryptographic 64-bit hash (seeded), used for bloom-clock
/// probes and hash-partitioning. Stable across platforms.
uint64_t hash64(std::span<const uint8_t> data, uint64_t seed);

inline uint64_t hash64(const Hash256& h, uint64_t seed)
{
    return hash64(std::span<const uint8_t>(h.data(), h.size()), seed);
}

} // namespace lo
