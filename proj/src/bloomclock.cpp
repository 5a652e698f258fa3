#include <lo/bloomclock.hpp>

#include <lo/hash.hpp>

#include <stdexcept>

namespace lo {

BloomClock::BloomClock(uint16_t cells, uint8_t probes, uint32_t seed)
    : probes_(probes), seed_(seed), counters_(cells, 0)
{
    if (cells == 0 || probes == 0) throw std::invalid_argument("bloom clock needs cells and probes");
}

std::vector<uint16_t> BloomClock::probe_cells(const Hash256& id) const
{
    uint64_t h = hash64(id, uint64_t(seed_));
    uint64_t h1 = h & 0xffffffffULL;
    uint64_t h2 = h >> 32;
    std::vector<uint16_t> out;
    out.reserve(probes_);
    for (uint8_t i = 0; i < probes_; ++i)
        out.push_back(uint16_t((h1 + uint64_t(i) * h2) % counters_.size()));
    return out;
}

void BloomClock::add(const Hash256& id)
{
    for (uint16_t cell : probe_cells(id)) {
        if (counters_[cell] == kMaxCount) {
            saturated_ = true;
        } else {
            ++counters_[cell];
            if (counters_[cell] == kMaxCount) saturated_ = true;
        }
    }
}

void BloomClock::check_params(const BloomClock& other) const
{
    if (counters_.size() != other.counters_.size() || probes_ != other.probes_ ||
        seed_ != other.seed_)
        throw std::invalid_argument("bloom clock parameter mismatch");
}

ClockOrder BloomClock::compare(const BloomClock& other) const
{
    check_params(other);
    bool left_greater = false, right_greater = false;
    for (size_t i = 0; i < counters_.size(); ++i) {
        if (counters_[i] > other.counters_[i]) left_greater = true;
        if (counters_[i] < other.counters_[i]) right_greater = true;
    }
    if (left_greater && right_greater) return ClockOrder::Concurrent;
    if (left_greater) return ClockOrder::LeftDominates;
    if (right_greater) return ClockOrder::RightDominates;
    return ClockOrder::Equal;
}

bool BloomClock::consistent_after(const BloomClock& prev) const
{
    ClockOrder o = compare(prev);
    return o == ClockOrder::Equal || o == ClockOrder::LeftDominates;
}

Bytes BloomClock::serialize() const
{
    Bytes out;
    out.reserve(wire_size());
    put_u16le(out, uint16_t(counters_.size()));
    out.push_back(probes_);
    out.push_back(0); // reserved
    for (uint16_t c : counters_) put_u16le(out, c);
    return out;
}

BloomClock BloomClock::deserialize(std::span<const uint8_t> data, uint32_t seed)
{
    if (data.size() < 4) throw std::invalid_argument("bloom clock truncated");
    uint16_t cells = get_u16le(data.data());
    uint8_t probes = data[2];
    if (data.size() != 4 + size_t(cells) * 2)
        throw std::invalid_argument("bloom clock length mismatch");
    BloomClock c(cells, probes, seed);
    for (size_t i = 0; i < cells; ++i) {
        c.counters_[i] = get_u16le(data.data() + 4 + 2 * i);
        if (c.counters_[i] == kMaxCount) c.saturated_ = true;
    }
    return c;
}

} // namespace lo
