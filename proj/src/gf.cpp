#include <lo/gf.hpp>

#if defined(LO_HAVE_PCLMUL)
#include <immintrin.h>
#endif

namespace lo::gf {

namespace {

#if defined(LO_HAVE_PCLMUL)

inline uint64_t lo64(__m128i v) { return uint64_t(_mm_cvtsi128_si64(v)); }
inline uint64_t hi64(__m128i v) { return uint64_t(_mm_extract_epi64(v, 1)); }

U256 clmul128(u128 a, u128 b)
{
    __m128i va = _mm_set_epi64x(int64_t(uint64_t(a >> 64)), int64_t(uint64_t(a)));
    __m128i vb = _mm_set_epi64x(int64_t(uint64_t(b >> 64)), int64_t(uint64_t(b)));
    __m128i p00 = _mm_clmulepi64_si128(va, vb, 0x00);
    __m128i p01 = _mm_clmulepi64_si128(va, vb, 0x10);
    __m128i p10 = _mm_clmulepi64_si128(va, vb, 0x01);
    __m128i p11 = _mm_clmulepi64_si128(va, vb, 0x11);
    __m128i mid = _mm_xor_si128(p01, p10);
    U256 r;
    r.lo = (u128(hi64(p00)) << 64 | lo64(p00)) ^ (u128(lo64(mid)) << 64);
    r.hi = (u128(hi64(p11)) << 64 | lo64(p11)) ^ u128(hi64(mid));
    return r;
}

#else

// Portable carry-less multiply, 4-bit windowed.
U256 clmul128(u128 a, u128 b)
{
    u128 tbl[16];
    tbl[0] = 0;
    tbl[1] = a;
    // Table entries may exceed 128 bits only if a has bits above 124;
    // callers keep operands below 2^80, so shifts by <4 are safe.
    for (int i = 2; i < 16; i += 2) {
        tbl[i] = tbl[i / 2] << 1;
        tbl[i + 1] = tbl[i] ^ a;
    }
    U256 acc;
    for (int shift = 124; shift >= 0; shift -= 4) {
        // acc <<= 4
        acc.hi = (acc.hi << 4) | (acc.lo >> 124);
        acc.lo <<= 4;
        uint8_t nib = uint8_t((b >> shift) & 0xf);
        acc.lo ^= tbl[nib];
    }
    return acc;
}

#endif

} // namespace

Field::Field(int bits, int t1, int t2, int t3)
    : bits_(bits), t1_(t1), t2_(t2), t3_(t3)
{
    mask_ = bits == 128 ? ~u128(0) : (u128(1) << bits) - 1;
}

const Field& Field::of(int bits)
{
    static const Field f32(32, 7, 3, 2);
    static const Field f64(64, 4, 3, 1);
    static const Field f80(80, 9, 4, 2);
    switch (bits) {
    case 32: return f32;
    case 64: return f64;
    case 80: return f80;
    default: throw std::invalid_argument("unsupported field size");
    }
}

u128 Field::reduce(U256 p) const
{
    // Fold everything at and above x^bits down through the low taps.
    // deg(p) <= 2*bits - 2 <= 158, so the folded part always fits in
    // 128 bits and the first fold clears p.hi entirely.
    u128 t = (p.lo >> bits_) | (p.hi << (128 - bits_));
    u128 v = (p.lo & mask_) ^ t ^ (t << t1_) ^ (t << t2_) ^ (t << t3_);
    while ((v & ~mask_) != 0) {
        t = v >> bits_;
        v = (v & mask_) ^ t ^ (t << t1_) ^ (t << t2_) ^ (t << t3_);
    }
    return v;
}

u128 Field::mul(u128 a, u128 b) const
{
    return reduce(clmul128(a, b));
}

u128 Field::pow(u128 a, u128 e) const
{
    u128 r = 1;
    u128 base = a;
    while (e != 0) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

u128 Field::inv(u128 a) const
{
    if (a == 0) throw std::domain_error("inverse of zero");
    // a^(2^bits - 2)
    u128 e = mask_ - 1; // 2^bits - 2 for bits < 128
    return pow(a, e);
}

} // namespace lo::gf
