#pragma once

#include <cstdint>
#include <stdexcept>

namespace lo::gf {

using u128 = unsigned __int128;

/// Carry-less 256-bit product, hi:lo.
struct U256 {
    u128 lo = 0;
    u128 hi = 0;
};

/// GF(2^b) with a fixed irreducible pentanomial modulus per supported b.
/// Elements are polynomials over GF(2) packed into the low b bits.
class Field {
public:
    /// Supported sizes: 32, 64, 80. Throws on anything else.
    static const Field& of(int bits);

    int bits() const { return bits_; }
    u128 mask() const { return mask_; }

    u128 add(u128 a, u128 b) const { return a ^ b; }
    u128 mul(u128 a, u128 b) const;
    u128 sqr(u128 a) const { return mul(a, a); }
    u128 inv(u128 a) const;
    u128 pow(u128 a, u128 e) const;

private:
    Field(int bits, int t1, int t2, int t3);

    u128 reduce(U256 p) const;

    int bits_;
    u128 mask_;
    // Modulus x^bits + x^t1 + x^t2 + x^t3 + 1, taps in descending order.
    int t1_, t2_, t3_;
};

} // namespace lo::gf
