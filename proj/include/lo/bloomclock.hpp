#pragma once

#include <lo/bytes.hpp>

#include <cstdint>
#include <vector>

namespace lo {

enum class ClockOrder {
    Equal,
    LeftDominates,
    RightDominates,
    Concurrent,
};

/// Counting-filter partial-order clock over a grow-only element set.
/// Counters only ever increase, so for sets A ⊆ B the clock of B always
/// dominates the clock of A; the converse is probabilistic.
class BloomClock {
public:
    static constexpr uint16_t kMaxCount = 0xffff;

    explicit BloomClock(uint16_t cells = 32, uint8_t probes = 3, uint32_t seed = 0);

    uint16_t cells() const { return uint16_t(counters_.size()); }
    uint8_t probes() const { return probes_; }
    uint32_t seed() const { return seed_; }
    bool saturated() const { return saturated_; }
    const std::vector<uint16_t>& counters() const { return counters_; }

    /// The probe cells for an element id under these parameters
    /// (double hashing, probes distinct only by accident).
    std::vector<uint16_t> probe_cells(const Hash256& id) const;

    void add(const Hash256& id);

    /// Cell-wise comparison; requires identical parameters.
    ClockOrder compare(const BloomClock& other) const;

    /// Fast-path append-only check: true iff `this` dominates-or-equals
    /// `prev`. A negative must be confirmed with set checksums before it
    /// is treated as evidence (probe collisions can mask removals, never
    /// the reverse).
    bool consistent_after(const BloomClock& prev) const;

    /// 4-byte header (cells u16, probes u8, reserved u8) then the
    /// counters as little-endian u16: 68 bytes at 32 cells.
    Bytes serialize() const;
    /// The hash seed is deployment-wide and travels out of band.
    static BloomClock deserialize(std::span<const uint8_t> data, uint32_t seed = 0);
    size_t wire_size() const { return 4 + 2 * counters_.size(); }

    bool operator==(const BloomClock&) const = default;

private:
    void check_params(const BloomClock& other) const;

    uint8_t probes_;
    uint32_t seed_;
    bool saturated_ = false;
    std::vector<uint16_t> counters_;
};

} // namespace lo
