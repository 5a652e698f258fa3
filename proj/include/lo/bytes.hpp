#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace lo {

using Bytes = std::vector<uint8_t>;
using Hash256 = std::array<uint8_t, 32>;

inline constexpr Hash256 kZeroHash{};

inline void put_u16le(Bytes& out, uint16_t v)
{
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
}

inline void put_u32le(Bytes& out, uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void put_u64le(Bytes& out, uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint16_t get_u16le(const uint8_t* p)
{
    return uint16_t(p[0]) | uint16_t(p[1]) << 8;
}

inline uint32_t get_u32le(const uint8_t* p)
{
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
    return v;
}

inline uint64_t get_u64le(const uint8_t* p)
{
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
}

inline void put_bytes(Bytes& out, std::span<const uint8_t> b)
{
    out.insert(out.end(), b.begin(), b.end());
}

/// Length-prefixed field append: u32 length then raw bytes.
inline void put_field(Bytes& out, std::span<const uint8_t> b)
{
    put_u32le(out, uint32_t(b.size()));
    put_bytes(out, b);
}

inline std::string to_hex(std::span<const uint8_t> b)
{
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

inline Bytes from_hex(const std::string& s)
{
    auto nib = [](char c) -> uint8_t {
        if (c >= '0' && c <= '9') return uint8_t(c - '0');
        if (c >= 'a' && c <= 'f') return uint8_t(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return uint8_t(c - 'A' + 10);
        return 0;
    };
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i + 1 < s.size(); i += 2)
        out.push_back(uint8_t(nib(s[i]) << 4 | nib(s[i + 1])));
    return out;
}

} // namespace lo
