#include <doctest.h>

#include <lo/bloomclock.hpp>
#include <lo/hash.hpp>
#include <lo/rng.hpp>

#include <set>

using lo::BloomClock;
using lo::ClockOrder;
using lo::Hash256;

namespace {

Hash256 random_id(lo::Rng& rng)
{
    Hash256 h{};
    for (int i = 0; i < 4; ++i) {
        uint64_t w = rng.next();
        for (int j = 0; j < 8; ++j) h[size_t(8 * i + j)] = uint8_t(w >> (8 * j));
    }
    return h;
}

} // namespace

TEST_CASE("adding dominates the prior clock")
{
    lo::Rng rng(11);
    BloomClock c;
    for (int i = 0; i < 50; ++i) {
        BloomClock prev = c;
        c.add(random_id(rng));
        CHECK(c.consistent_after(prev));
        CHECK(c.compare(prev) == ClockOrder::LeftDominates);
    }
}

TEST_CASE("same id twice increments probe cells by two")
{
    lo::Rng rng(12);
    Hash256 id = random_id(rng);
    BloomClock c;
    c.add(id);
    c.add(id);
    auto probes = c.probe_cells(id);
    uint32_t total = 0;
    for (uint16_t v : c.counters()) total += v;
    // each add increments once per probe occurrence
    CHECK(total == 2u * uint32_t(probes.size()));
    for (uint16_t cell : probes) CHECK(c.counters()[cell] >= 2);
}

TEST_CASE("insertion order does not matter")
{
    lo::Rng rng(13);
    std::vector<Hash256> ids;
    for (int i = 0; i < 20; ++i) ids.push_back(random_id(rng));
    BloomClock a, b;
    for (const auto& id : ids) a.add(id);
    for (auto it = ids.rbegin(); it != ids.rend(); ++it) b.add(*it);
    CHECK(a == b);
}

TEST_CASE("empty clock is dominated by any clock")
{
    lo::Rng rng(14);
    BloomClock empty;
    BloomClock x;
    CHECK(x.compare(empty) == ClockOrder::Equal);
    x.add(random_id(rng));
    CHECK(x.compare(empty) == ClockOrder::LeftDominates);
    CHECK(x.consistent_after(empty));
    CHECK(!empty.consistent_after(x));
}

TEST_CASE("ids with disjoint probe sets compare concurrent")
{
    lo::Rng rng(15);
    BloomClock probe_oracle;
    // search for two ids whose probe cells do not overlap
    Hash256 a{}, b{};
    bool found = false;
    for (int i = 0; i < 1000 && !found; ++i) {
        a = random_id(rng);
        b = random_id(rng);
        auto pa = probe_oracle.probe_cells(a);
        auto pb = probe_oracle.probe_cells(b);
        std::set<uint16_t> sa(pa.begin(), pa.end());
        found = true;
        for (uint16_t c : pb)
            if (sa.count(c)) found = false;
    }
    REQUIRE(found);
    BloomClock ca, cb;
    ca.add(a);
    cb.add(b);
    CHECK(ca.compare(cb) == ClockOrder::Concurrent);
    CHECK(!ca.consistent_after(cb));
    CHECK(!cb.consistent_after(ca));
}

TEST_CASE("removal without colliding additions is detected")
{
    lo::Rng rng(16);
    // prev = {x, y}; next = {x, z} where z's probes avoid y's.
    BloomClock oracle;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Hash256 x = random_id(rng), y = random_id(rng), z = random_id(rng);
        auto py = oracle.probe_cells(y);
        auto pz = oracle.probe_cells(z);
        std::set<uint16_t> sy(py.begin(), py.end());
        bool disjoint = true;
        for (uint16_t c : pz)
            if (sy.count(c)) disjoint = false;
        if (!disjoint) continue;
        BloomClock prev, next;
        prev.add(x);
        prev.add(y);
        next.add(x);
        next.add(z);
        CHECK(!next.consistent_after(prev));
        return;
    }
    FAIL("no disjoint triple found");
}

TEST_CASE("no false negatives over a long append-only chain")
{
    lo::Rng rng(17);
    BloomClock c;
    BloomClock checkpoint = c;
    for (int i = 0; i < 100000; ++i) {
        c.add(random_id(rng));
        if (i % 1000 == 0) {
            CHECK(c.consistent_after(checkpoint));
            checkpoint = c;
        }
    }
    CHECK(c.consistent_after(checkpoint));
}

TEST_CASE("wire format is 68 bytes at 32 cells and round-trips")
{
    lo::Rng rng(18);
    BloomClock c;
    for (int i = 0; i < 40; ++i) c.add(random_id(rng));
    lo::Bytes wire = c.serialize();
    CHECK(wire.size() == 68);
    BloomClock back = BloomClock::deserialize(wire, c.seed());
    CHECK(back == c);

    wire.pop_back();
    CHECK_THROWS(BloomClock::deserialize(wire));
}

TEST_CASE("parameter mismatch rejected")
{
    BloomClock a(32, 3, 0), b(16, 3, 0), c(32, 4, 0);
    CHECK_THROWS((void)a.compare(b));
    CHECK_THROWS((void)a.compare(c));
}

TEST_CASE("saturation is flagged and survives serialization")
{
    lo::Rng rng(19);
    BloomClock c(4, 2, 7);
    Hash256 id = random_id(rng);
    for (int i = 0; i < 70000; ++i) c.add(id);
    CHECK(c.saturated());
    BloomClock back = BloomClock::deserialize(c.serialize(), 7);
    CHECK(back.saturated());
}
