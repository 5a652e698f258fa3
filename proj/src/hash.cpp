#include <lo/hash.hpp>

#include <openssl/sha.h>

namespace lo {

Hash256 sha256(std::span<const uint8_t> data)
{
    Hash256 out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Hash256 tagged_hash(std::string_view tag, std::span<const uint8_t> data)
{
    Hash256 th = sha256({reinterpret_cast<const uint8_t*>(tag.data()), tag.size()});
    Bytes buf;
    buf.reserve(64 + data.size());
    put_bytes(buf, th);
    put_bytes(buf, th);
    put_bytes(buf, data);
    return sha256(buf);
}

namespace {

inline uint64_t rotl64(uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

inline uint64_t mix(uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

uint64_t hash64(std::span<const uint8_t> data, uint64_t seed)
{
    uint64_t h = mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ (uint64_t(data.size()) * 0xff51afd7ed558ccdULL);
    size_t i = 0;
    while (i + 8 <= data.size()) {
        uint64_t w = get_u64le(data.data() + i);
        h = rotl64(h ^ mix(w), 27) * 0x2545f4914f6cdd1dULL;
        i += 8;
    }
    uint64_t tail = 0;
    int shift = 0;
    while (i < data.size()) {
        tail |= uint64_t(data[i]) << shift;
        shift += 8;
        ++i;
    }
    if (shift) h = rotl64(h ^ mix(tail), 27) * 0x2545f4914f6cdd1dULL;
    return mix(h);
}

} // namespace lo
