#include <lo/sketch.hpp>

#include <algorithm>
#include <stdexcept>

namespace lo {

using gf::Field;
using gf::u128;

namespace {

// Dense polynomials over GF(2^b), coefficients ascending, used only by
// the decoder. All inputs to mod/gcd are kept monic.
using Poly = std::vector<u128>;

void trim(Poly& p)
{
    while (!p.empty() && p.back() == 0) p.pop_back();
}

int degree(const Poly& p) { return int(p.size()) - 1; }

// r = r mod m, m monic.
void mod_inplace(const Field& f, Poly& r, const Poly& m)
{
    int dm = degree(m);
    while (degree(r) >= dm) {
        u128 lead = r.back();
        int shift = degree(r) - dm;
        if (lead != 0) {
            for (int i = 0; i < dm; ++i)
                r[size_t(i + shift)] = f.add(r[size_t(i + shift)], f.mul(lead, m[size_t(i)]));
        }
        r.pop_back();
        trim(r);
    }
}

// p^2 mod m. Squaring is linear in characteristic 2: coefficients square
// and spread to even positions, so this is O(deg) squarings plus one
// reduction instead of a full product.
Poly sqr_mod(const Field& f, const Poly& p, const Poly& m)
{
    if (p.empty()) return {};
    Poly sq(2 * p.size() - 1, 0);
    for (size_t i = 0; i < p.size(); ++i)
        if (p[i] != 0) sq[2 * i] = f.sqr(p[i]);
    trim(sq);
    mod_inplace(f, sq, m);
    return sq;
}

void make_monic(const Field& f, Poly& p)
{
    trim(p);
    if (p.empty()) return;
    u128 lead = p.back();
    if (lead == 1) return;
    u128 inv = f.inv(lead);
    for (auto& c : p) c = f.mul(c, inv);
}

// r = (scalar multiple of) r mod m, with m not necessarily monic.
// Cross-multiplies instead of dividing, so no field inversions; the gcd
// below is invariant under scalar factors.
void pseudo_mod_inplace(const Field& f, Poly& r, const Poly& m)
{
    int dm = degree(m);
    u128 ml = m.back();
    while (degree(r) >= dm) {
        u128 lead = r.back();
        int shift = degree(r) - dm;
        if (lead != 0) {
            for (auto& c : r) c = f.mul(ml, c);
            for (int i = 0; i < dm; ++i)
                r[size_t(i + shift)] = f.add(r[size_t(i + shift)], f.mul(lead, m[size_t(i)]));
        }
        r.pop_back();
        trim(r);
    }
}

Poly gcd(const Field& f, Poly a, Poly b)
{
    trim(a);
    trim(b);
    while (!b.empty()) {
        pseudo_mod_inplace(f, a, b);
        std::swap(a, b);
    }
    make_monic(f, a);
    return a;
}

// Berlekamp-Massey over GF(2^b): minimal connection polynomial
// C(x) = 1 + c1 x + ... + cL x^L for the syndrome sequence.
Poly berlekamp_massey(const Field& f, const std::vector<u128>& s)
{
    Poly c{1}, b{1};
    int l = 0, m = 1;
    u128 bd_inv = 1; // cached inverse of the last pivot discrepancy
    for (size_t n = 0; n < s.size(); ++n) {
        u128 d = s[n];
        for (int i = 1; i <= l && size_t(i) < c.size(); ++i)
            d = f.add(d, f.mul(c[size_t(i)], s[n - size_t(i)]));
        if (d == 0) {
            ++m;
            continue;
        }
        u128 coef = f.mul(d, bd_inv);
        bool lengthen = 2 * l <= int(n);
        Poly t;
        if (lengthen) t = c;
        if (c.size() < b.size() + size_t(m)) c.resize(b.size() + size_t(m), 0);
        for (size_t i = 0; i < b.size(); ++i)
            c[i + size_t(m)] = f.add(c[i + size_t(m)], f.mul(coef, b[i]));
        if (lengthen) {
            l = int(n) + 1 - l;
            b = std::move(t);
            bd_inv = f.inv(d);
            m = 1;
        } else {
            ++m;
        }
    }
    trim(c);
    return c;
}

// Recursive equal-degree splitting via the trace map. `frob[i]` holds
// x^(2^i) mod the top-level locator; traces for any beta are linear
// combinations of those, reduced mod the current factor.
struct RootFinder {
    const Field& f;
    std::vector<Poly> frob; // x^(2^i) mod top, i in [0, bits)
    std::vector<u128>& roots;
    uint64_t beta_counter = 1;

    bool split(const Poly& g)
    {
        int dg = degree(g);
        if (dg <= 0) return true;
        if (dg == 1) {
            roots.push_back(g[0]); // monic x + a has root a
            return true;
        }
        // Try successive deterministic betas until the trace splits g.
        for (int attempt = 0; attempt < 96; ++attempt) {
            u128 beta = next_beta();
            Poly t = trace_mod(beta, g);
            Poly h = gcd(f, g, t);
            int dh = degree(h);
            if (dh > 0 && dh < dg) {
                Poly q = divide(g, h);
                return split(h) && split(q);
            }
        }
        return false;
    }

    u128 next_beta()
    {
        // splitmix-style stream, widened to the field size
        uint64_t z = (beta_counter++) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        u128 v = (u128(z) << 64) | (z * 0x2545f4914f6cdd1dULL);
        v &= f.mask();
        return v == 0 ? 1 : v;
    }

    Poly trace_mod(u128 beta, const Poly& g)
    {
        Poly acc;
        u128 bpow = beta;
        for (const Poly& xi : frob) {
            if (acc.size() < xi.size()) acc.resize(xi.size(), 0);
            for (size_t j = 0; j < xi.size(); ++j)
                acc[j] = f.add(acc[j], f.mul(bpow, xi[j]));
            bpow = f.sqr(bpow);
        }
        trim(acc);
        mod_inplace(f, acc, g);
        return acc;
    }

    Poly divide(const Poly& g, const Poly& h)
    {
        // g / h for monic h dividing g exactly.
        Poly r = g;
        Poly q(g.size() - h.size() + 1, 0);
        int dh = degree(h);
        while (degree(r) >= dh) {
            int shift = degree(r) - dh;
            u128 lead = r.back();
            q[size_t(shift)] = lead;
            for (int i = 0; i <= dh; ++i)
                r[size_t(i + shift)] = f.add(r[size_t(i + shift)], f.mul(lead, h[size_t(i)]));
            trim(r);
        }
        return q;
    }
};

} // namespace

Sketch::Sketch(int capacity, int field_bits)
    : capacity_(capacity), field_bits_(field_bits), odd_syndromes_(size_t(capacity), 0)
{
    if (capacity <= 0) throw std::invalid_argument("sketch capacity must be positive");
    Field::of(field_bits); // validates the size
}

void Sketch::add(gf::u128 element)
{
    const Field& f = Field::of(field_bits_);
    if (element == 0) throw std::invalid_argument("zero element is not a valid sketch member");
    if ((element & ~f.mask()) != 0) throw std::invalid_argument("element exceeds field size");
    u128 esq = f.sqr(element);
    u128 pow = element; // e^(2i+1)
    for (auto& syn : odd_syndromes_) {
        syn = f.add(syn, pow);
        pow = f.mul(pow, esq);
    }
}

void Sketch::merge(const Sketch& other)
{
    if (capacity_ != other.capacity_) throw std::invalid_argument("sketch capacity mismatch");
    if (field_bits_ != other.field_bits_) throw std::invalid_argument("sketch field mismatch");
    for (size_t i = 0; i < odd_syndromes_.size(); ++i)
        odd_syndromes_[i] ^= other.odd_syndromes_[i];
}

bool Sketch::is_zero() const
{
    return std::all_of(odd_syndromes_.begin(), odd_syndromes_.end(),
                       [](u128 v) { return v == 0; });
}

std::optional<std::vector<gf::u128>> Sketch::decode() const
{
    if (is_zero()) return std::vector<u128>{};
    const Field& f = Field::of(field_bits_);

    // Expand the full syndrome sequence: even indices are squares of
    // their halves, recursively grounded in the stored odd ones.
    std::vector<u128> s(size_t(2 * capacity_), 0);
    for (int i = 1; i <= 2 * capacity_; ++i) {
        int k = i;
        int sq = 0;
        while (k % 2 == 0) {
            k /= 2;
            ++sq;
        }
        u128 v = odd_syndromes_[size_t((k - 1) / 2)];
        for (int j = 0; j < sq; ++j) v = f.sqr(v);
        s[size_t(i - 1)] = v;
    }

    Poly locator = berlekamp_massey(f, s);
    int l = degree(locator);
    if (l <= 0 || l > capacity_) return std::nullopt;

    // Reverse to the monic polynomial whose roots are the elements.
    Poly r(locator.rbegin(), locator.rend());
    trim(r);
    if (degree(r) != l) return std::nullopt; // locator had a zero constant term
    make_monic(f, r);

    // Frobenius powers of x mod r; r splits into distinct linear factors
    // over GF(2^b) iff x^(2^b) == x mod r.
    std::vector<u128> roots;
    std::vector<Poly> frob;
    Poly x{0, 1};
    mod_inplace(f, x, r);
    Poly cur = x;
    for (int i = 0; i < f.bits(); ++i) {
        frob.push_back(cur);
        cur = sqr_mod(f, cur, r);
    }
    if (cur != x) return std::nullopt; // does not split completely

    RootFinder rf{f, std::move(frob), roots};
    if (!rf.split(r)) return std::nullopt;
    if (int(roots.size()) != l) return std::nullopt;
    for (u128 e : roots)
        if (e == 0) return std::nullopt;

    // Verify: the recovered set must reproduce the stored syndromes.
    Sketch check(capacity_, field_bits_);
    for (u128 e : roots) check.add(e);
    if (check.odd_syndromes_ != odd_syndromes_) return std::nullopt;

    std::sort(roots.begin(), roots.end());
    return roots;
}

Bytes Sketch::serialize() const
{
    Bytes out;
    size_t elem_bytes = size_t(field_bits_) / 8;
    out.reserve(odd_syndromes_.size() * elem_bytes);
    for (u128 syn : odd_syndromes_)
        for (size_t i = 0; i < elem_bytes; ++i)
            out.push_back(uint8_t(syn >> (8 * (elem_bytes - 1 - i))));
    return out;
}

Sketch Sketch::deserialize(std::span<const uint8_t> data, int capacity, int field_bits)
{
    Sketch s(capacity, field_bits);
    size_t elem_bytes = size_t(field_bits) / 8;
    if (data.size() != size_t(capacity) * elem_bytes)
        throw std::invalid_argument("sketch length mismatch");
    for (size_t i = 0; i < size_t(capacity); ++i) {
        u128 v = 0;
        for (size_t j = 0; j < elem_bytes; ++j)
            v = (v << 8) | data[i * elem_bytes + j];
        s.odd_syndromes_[i] = v;
    }
    return s;
}

} // namespace lo
