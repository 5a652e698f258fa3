#include <doctest.h>

#include <lo/mempool.hpp>
#include <lo/rng.hpp>

#include <algorithm>

using namespace lo;

namespace {

TxId id_of(uint64_t n)
{
    TxId id{};
    for (int i = 0; i < 8; ++i) id.digest[size_t(i)] = uint8_t(n >> (8 * i));
    return id;
}

TxId random_id(lo::Rng& rng)
{
    TxId id;
    for (int j = 0; j < 4; ++j) {
        uint64_t w = rng.next();
        for (int k = 0; k < 8; ++k) id.digest[size_t(8 * j + k)] = uint8_t(w >> (8 * k));
    }
    return id;
}

PublicKey peer_of(uint8_t n)
{
    PublicKey pk{};
    pk[0] = n;
    return pk;
}

} // namespace

TEST_CASE("bundles keep arrival order, ids sort within a bundle")
{
    MempoolLog log;
    const Bundle* b0 = log.append_bundle({id_of(4), id_of(1), id_of(3)}, std::nullopt, 0);
    REQUIRE(b0 != nullptr);
    CHECK(b0->index == 0);
    CHECK(b0->tx_ids == std::vector<TxId>{id_of(1), id_of(3), id_of(4)});

    const Bundle* b1 = log.append_bundle({id_of(2)}, peer_of(7), 3);
    REQUIRE(b1 != nullptr);
    CHECK(b1->index == 1);
    CHECK(b1->tx_ids == std::vector<TxId>{id_of(2)});
    CHECK(b1->source.has_value());
    CHECK(b1->commit_seq == 3);

    REQUIRE(log.bundles().size() == 2);
    CHECK(log.bundles()[0].tx_ids == std::vector<TxId>{id_of(1), id_of(3), id_of(4)});
    CHECK(log.bundles()[1].tx_ids == std::vector<TxId>{id_of(2)});
    CHECK(log.tx_count() == 4);
}

TEST_CASE("known ids are dropped from later bundles")
{
    MempoolLog log;
    log.append_bundle({id_of(1), id_of(2)}, std::nullopt, 0);

    // full overlap: no-op
    CHECK(log.append_bundle({id_of(2), id_of(1)}, peer_of(1), 1) == nullptr);
    CHECK(log.bundles().size() == 1);

    // partial overlap: only the new id lands
    const Bundle* b = log.append_bundle({id_of(2), id_of(5)}, peer_of(1), 2);
    REQUIRE(b != nullptr);
    CHECK(b->tx_ids == std::vector<TxId>{id_of(5)});

    // duplicates inside one request collapse
    const Bundle* c = log.append_bundle({id_of(9), id_of(9)}, std::nullopt, 0);
    REQUIRE(c != nullptr);
    CHECK(c->tx_ids == std::vector<TxId>{id_of(9)});

    CHECK(log.append_bundle({}, std::nullopt, 0) == nullptr);
}

TEST_CASE("content arrives only for promised ids")
{
    MempoolLog log;
    KeyPair keys = derive_keypair(SigMode::Mac, Hash256{});
    Transaction tx = make_transaction(keys, 10, {0x01});
    Transaction stray = make_transaction(keys, 11, {0x02});

    CHECK(!log.add_content(tx)); // never promised
    log.append_bundle({tx.id, id_of(42)}, std::nullopt, 0);
    CHECK(log.knows(tx.id));
    CHECK(!log.has_content(tx.id));
    CHECK(log.missing_content() == std::vector<TxId>{(tx.id < id_of(42)) ? tx.id : id_of(42),
                                                     (tx.id < id_of(42)) ? id_of(42) : tx.id});

    CHECK(log.add_content(tx));
    CHECK(log.has_content(tx.id));
    REQUIRE(log.content(tx.id) != nullptr);
    CHECK(log.content(tx.id)->fee == 10);
    CHECK(log.missing_content() == std::vector<TxId>{id_of(42)});

    CHECK(!log.add_content(stray));
    CHECK(log.content(stray.id) == nullptr);
}

TEST_CASE("replaying the same appends yields an identical log")
{
    auto build = [] {
        MempoolLog log;
        lo::Rng rng(77);
        for (int i = 0; i < 50; ++i) {
            std::vector<TxId> ids;
            for (uint64_t n = rng.below(5); n > 0; --n)
                ids.push_back(rng.below(3) == 0 ? id_of(rng.below(20)) : random_id(rng));
            log.append_bundle(ids, rng.below(2) ? std::optional(peer_of(uint8_t(rng.below(4))))
                                                : std::nullopt,
                              rng.below(10));
        }
        return log;
    };
    MempoolLog a = build();
    MempoolLog b = build();
    REQUIRE(a.bundles().size() == b.bundles().size());
    for (size_t i = 0; i < a.bundles().size(); ++i) {
        CHECK(a.bundles()[i].tx_ids == b.bundles()[i].tx_ids);
        CHECK(a.bundles()[i].index == b.bundles()[i].index);
    }
    CHECK(a.known() == b.known());
}

TEST_CASE("bundle concatenation partitions the known set")
{
    MempoolLog log;
    lo::Rng rng(78);
    for (int i = 0; i < 40; ++i) {
        std::vector<TxId> ids;
        for (uint64_t n = rng.below(6); n > 0; --n)
            ids.push_back(rng.below(2) == 0 ? id_of(rng.below(30)) : random_id(rng));
        log.append_bundle(ids, std::nullopt, 0);
    }
    std::vector<TxId> concat;
    for (const Bundle& b : log.bundles()) {
        CHECK(std::is_sorted(b.tx_ids.begin(), b.tx_ids.end()));
        CHECK(!b.tx_ids.empty());
        concat.insert(concat.end(), b.tx_ids.begin(), b.tx_ids.end());
    }
    CHECK(concat.size() == log.tx_count());
    std::sort(concat.begin(), concat.end());
    CHECK(std::adjacent_find(concat.begin(), concat.end()) == concat.end());
    CHECK(std::set<TxId>(concat.begin(), concat.end()) == log.known());
}
