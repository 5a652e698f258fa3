#pragma once

#include <lo/bytes.hpp>
#include <lo/gf.hpp>

#include <optional>
#include <vector>

namespace lo {

/// Fixed-capacity set-difference codec over GF(2^b). Stores the odd power
/// sums (syndromes) of inserted elements; merging two sketches by xor
/// yields the sketch of the symmetric difference, decodable as long as
/// the difference has at most `capacity` elements.
class Sketch {
public:
    Sketch(int capacity, int field_bits);

    int capacity() const { return capacity_; }
    int field_bits() const { return field_bits_; }
    size_t wire_size() const { return size_t(capacity_) * size_t(field_bits_) / 8; }

    /// Insert or cancel an element (characteristic-2: double insertion
    /// cancels). Zero and out-of-range elements are rejected.
    void add(gf::u128 element);

    /// Xor-in another sketch of identical shape; the result represents
    /// the symmetric difference of the underlying sets.
    void merge(const Sketch& other);

    /// Recover the represented set. Returns nullopt when the difference
    /// exceeds capacity or the locator polynomial does not split into
    /// distinct nonzero roots. A returned set is always verified against
    /// the syndromes, so a decode never silently returns a wrong set.
    std::optional<std::vector<gf::u128>> decode() const;

    bool is_zero() const;

    Bytes serialize() const;
    static Sketch deserialize(std::span<const uint8_t> data, int capacity, int field_bits);

    bool operator==(const Sketch&) const = default;

private:
    int capacity_;
    int field_bits_;
    std::vector<gf::u128> odd_syndromes_; // s_1, s_3, ..., s_{2c-1}
};

} // namespace lo
