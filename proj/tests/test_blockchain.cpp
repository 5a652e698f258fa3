#include <doctest.h>

#include <lo/blockchain.hpp>
#include <lo/rng.hpp>

#include "oracles.hpp"

#include <algorithm>

using namespace lo;

namespace {

Hash256 seed_of(uint64_t n)
{
    Hash256 h{};
    for (int i = 0; i < 8; ++i) h[size_t(i)] = uint8_t(n >> (8 * i));
    return h;
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

/// Ready-made honest world: one builder, three promised bundles with
/// delivered content, a commitment head covering exactly the log.
struct Scenario {
    BlockParams params;
    KeyPair keys;
    MempoolLog pool;
    Commitment head;
    std::vector<Transaction> txs;
    InspectContext ctx;

    explicit Scenario(IntraBundleOrder ordering, std::vector<size_t> bundle_sizes = {3, 1, 2})
        : head(DeployParams{})
    {
        params.deploy.sketch_capacity = 16;
        params.ordering = ordering;
        keys = derive_keypair(params.deploy.sig_mode, seed_of(0xb10c));
        head = Commitment(params.deploy);

        size_t total = 0;
        for (size_t s : bundle_sizes) total += s;
        for (size_t i = 0; i < total; ++i)
            txs.push_back(make_transaction(keys, int64_t(100 + i), {uint8_t(i)}));
        std::sort(txs.begin(), txs.end(),
                  [](const Transaction& a, const Transaction& b) { return a.id < b.id; });

        std::optional<Commitment> h;
        size_t at = 0;
        for (size_t s : bundle_sizes) {
            std::vector<TxId> ids;
            for (size_t i = 0; i < s; ++i) ids.push_back(txs[at + i].id);
            at += s;
            pool.append_bundle(ids, std::nullopt, h ? h->seq + 1 : 0);
            h = commit_extend(h, ids, keys, params.deploy);
        }
        head = *h;
        for (const Transaction& tx : txs) {
            pool.add_content(tx);
            ctx.expected_available.insert(tx.id);
        }
        ctx.params = params;
    }

    Block make_block(uint64_t height = 1, Hash256 prev = seed_of(0xfeed)) const
    {
        return build_block(pool, head, height, prev, ctx.chain_included, keys, params);
    }

    void resign(Block& blk) const { blk.signature = sign_bytes(keys, blk.signing_bytes()); }
};

} // namespace

TEST_CASE("canonical shuffle matches the reference implementation")
{
    lo::Rng rng(90);
    for (size_t n : {0u, 1u, 2u, 5u, 17u, 64u}) {
        std::vector<TxId> ids;
        for (size_t i = 0; i < n; ++i) ids.push_back(random_id(rng));
        Hash256 seed = seed_of(rng.next());

        std::vector<Hash256> raw;
        for (const TxId& id : ids) raw.push_back(id.digest);
        std::vector<Hash256> expect = oracle::fisher_yates(raw, seed);

        std::vector<TxId> got = canonical_shuffle(ids, seed);
        REQUIRE(got.size() == n);
        for (size_t i = 0; i < n; ++i) CHECK(got[i].digest == expect[i]);
    }
}

TEST_CASE("shuffle is a seed-sensitive permutation independent of input order")
{
    lo::Rng rng(91);
    std::vector<TxId> ids;
    for (int i = 0; i < 24; ++i) ids.push_back(random_id(rng));
    Hash256 seed = seed_of(7);

    std::vector<TxId> a = canonical_shuffle(ids, seed);
    std::vector<TxId> reversed(ids.rbegin(), ids.rend());
    CHECK(canonical_shuffle(reversed, seed) == a);

    std::vector<TxId> sorted_a = a;
    std::sort(sorted_a.begin(), sorted_a.end());
    std::vector<TxId> sorted_in = ids;
    std::sort(sorted_in.begin(), sorted_in.end());
    CHECK(sorted_a == sorted_in);

    CHECK(canonical_shuffle(ids, seed_of(8)) != a);
    CHECK(shuffle_seed(seed_of(1), 0) != shuffle_seed(seed_of(1), 1));
    CHECK(shuffle_seed(seed_of(1), 0) != shuffle_seed(seed_of(2), 0));
}

TEST_CASE("honest block passes inspection and round-trips")
{
    for (IntraBundleOrder ord : {IntraBundleOrder::Seeded, IntraBundleOrder::Sorted}) {
        Scenario s(ord);
        Block blk = s.make_block();
        CHECK(blk.tx_total() == 6);
        CHECK(blk.bundles.size() == 3);

        InspectResult res = inspect_block(blk, s.ctx);
        CHECK(res.verdict == BlockVerdict::Valid);

        Bytes wire = blk.encode();
        Block back = Block::decode(wire, s.params.deploy);
        CHECK(back == blk);
        wire.pop_back();
        CHECK_THROWS(Block::decode(wire, s.params.deploy));
    }
}

TEST_CASE("sorted ordering preserves bundle arrival with ascending ids inside")
{
    Scenario s(IntraBundleOrder::Sorted);
    // bundles were appended as {t1,t2,t3}, {t4}, {t5,t6} over ascending ids
    Block blk = s.make_block();
    std::vector<TxId> want = {s.txs[0].id, s.txs[1].id, s.txs[2].id,
                              s.txs[3].id, s.txs[4].id, s.txs[5].id};
    CHECK(blk.all_tx_ids() == want);
}

TEST_CASE("block skips invalid, missing, and already-included content")
{
    Scenario s(IntraBundleOrder::Sorted);
    // starve one tx of content, then put another on chain
    MempoolLog pool;
    for (const Bundle& b : s.pool.bundles()) pool.append_bundle(b.tx_ids, b.source, b.commit_seq);
    for (size_t i = 1; i < s.txs.size(); ++i) pool.add_content(s.txs[i]); // txs[0] missing

    Block blk = build_block(pool, s.head, 1, seed_of(1), {}, s.keys, s.params);
    std::vector<TxId> got = blk.all_tx_ids();
    CHECK(got.size() == 5);
    CHECK(std::find(got.begin(), got.end(), s.txs[0].id) == got.end());

    std::set<TxId> chain = {s.txs[2].id};
    Block blk2 = build_block(pool, s.head, 1, seed_of(1), chain, s.keys, s.params);
    got = blk2.all_tx_ids();
    CHECK(got.size() == 4);
    for (const TxId& id : got) CHECK(!chain.count(id));

    // a floor on fees prices transactions out entirely
    BlockParams pricey = s.params;
    int64_t max_fee = 0;
    for (const Transaction& tx : s.txs) max_fee = std::max(max_fee, tx.fee);
    pricey.min_fee = max_fee; // keeps exactly the single highest-fee tx
    Block blk3 = build_block(s.pool, s.head, 1, seed_of(1), {}, s.keys, pricey);
    got = blk3.all_tx_ids();
    REQUIRE(got.size() == 1);
    CHECK(s.pool.content(got[0])->fee == max_fee);
}

TEST_CASE("blockspace cap truncates by lowest id")
{
    Scenario s(IntraBundleOrder::Sorted, {5});
    BlockParams capped = s.params;
    capped.max_block_txs = 3;
    Block blk = build_block(s.pool, s.head, 1, seed_of(2), {}, s.keys, capped);
    CHECK(blk.all_tx_ids() == std::vector<TxId>{s.txs[0].id, s.txs[1].id, s.txs[2].id});
    InspectContext ctx = s.ctx;
    ctx.params = capped;
    // full block: omissions are capacity, not censorship
    CHECK(inspect_block(blk, ctx).verdict == BlockVerdict::Valid);
}

TEST_CASE("injected transaction is caught")
{
    Scenario s(IntraBundleOrder::Seeded);
    Block blk = s.make_block();
    Transaction alien = make_transaction(s.keys, 9999, {0xaa, 0xbb});
    blk.bundles[0].tx_ids.push_back(alien.id);
    blk.bundles[0].tx_ids =
        canonical_shuffle(blk.bundles[0].tx_ids, shuffle_seed(blk.prev_hash, 0));
    s.resign(blk);

    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.verdict == BlockVerdict::Evidence);
    CHECK(res.evidence->predicate == EvidencePredicate::BlockInjection);
    CHECK(verify_block_evidence(*res.evidence, s.ctx));
}

TEST_CASE("double inclusion and replay from chain are injection")
{
    Scenario s(IntraBundleOrder::Sorted);
    Block blk = s.make_block();
    blk.bundles[1].tx_ids.push_back(blk.bundles[0].tx_ids[0]);
    s.resign(blk);
    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.verdict == BlockVerdict::Evidence);
    CHECK(res.evidence->predicate == EvidencePredicate::BlockInjection);

    Block blk2 = s.make_block();
    InspectContext ctx = s.ctx;
    ctx.chain_included.insert(blk2.bundles[0].tx_ids[0]);
    InspectResult res2 = inspect_block(blk2, ctx);
    REQUIRE(res2.verdict == BlockVerdict::Evidence);
    CHECK(res2.evidence->predicate == EvidencePredicate::BlockInjection);
    CHECK(verify_block_evidence(*res2.evidence, ctx));
}

TEST_CASE("censorship with spare blockspace is caught")
{
    Scenario s(IntraBundleOrder::Sorted);
    Block blk = s.make_block();
    TxId victim = blk.bundles[0].tx_ids.back();
    blk.bundles[0].tx_ids.pop_back();
    s.resign(blk);

    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.verdict == BlockVerdict::Evidence);
    CHECK(res.evidence->predicate == EvidencePredicate::BlockspaceCensorship);
    CHECK(verify_block_evidence(*res.evidence, s.ctx));

    // the same omission is tolerated when the transaction was not due
    InspectContext lenient = s.ctx;
    lenient.expected_available.erase(victim);
    CHECK(inspect_block(blk, lenient).verdict == BlockVerdict::Valid);
}

TEST_CASE("intra-bundle reordering is caught")
{
    Scenario s(IntraBundleOrder::Seeded);
    Block blk = s.make_block();
    REQUIRE(blk.bundles[0].tx_ids.size() == 3);
    std::swap(blk.bundles[0].tx_ids[0], blk.bundles[0].tx_ids[1]);
    s.resign(blk);

    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.verdict == BlockVerdict::Evidence);
    CHECK(res.evidence->predicate == EvidencePredicate::BlockReordering);
    CHECK(verify_block_evidence(*res.evidence, s.ctx));
}

TEST_CASE("set violations outrank order violations")
{
    Scenario s(IntraBundleOrder::Seeded);
    Block blk = s.make_block();
    Transaction alien = make_transaction(s.keys, 1, {0xcc});
    blk.bundles[0].tx_ids.push_back(alien.id); // injected and out of order
    s.resign(blk);
    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.verdict == BlockVerdict::Evidence);
    CHECK(res.evidence->predicate == EvidencePredicate::BlockInjection);
}

TEST_CASE("unresolvable outcomes")
{
    Scenario s(IntraBundleOrder::Sorted);
    Block blk = s.make_block();
    blk.signature[0] ^= 1;
    CHECK(inspect_block(blk, s.ctx).verdict == BlockVerdict::Unresolvable);

    // difference beyond sketch capacity cannot be adjudicated: 20 promised
    // ids against a capacity-16 sketch and an empty block
    Scenario wide(IntraBundleOrder::Sorted, {20});
    Block empty_blk = build_block(MempoolLog(), wide.head, 1, seed_of(3), {}, wide.keys,
                                  wide.params);
    CHECK(inspect_block(empty_blk, wide.ctx).verdict == BlockVerdict::Unresolvable);
}

TEST_CASE("block evidence rejects tampering")
{
    Scenario s(IntraBundleOrder::Seeded);
    Block blk = s.make_block();
    std::swap(blk.bundles[0].tx_ids[0], blk.bundles[0].tx_ids[1]);
    s.resign(blk);
    InspectResult res = inspect_block(blk, s.ctx);
    REQUIRE(res.evidence.has_value());

    ExposureEvidence wrong_accused = *res.evidence;
    wrong_accused.accused[0] ^= 1;
    CHECK(!verify_block_evidence(wrong_accused, s.ctx));

    ExposureEvidence wrong_pred = *res.evidence;
    wrong_pred.predicate = EvidencePredicate::BlockInjection;
    CHECK(!verify_block_evidence(wrong_pred, s.ctx));

    ExposureEvidence garbled = *res.evidence;
    garbled.items[0][10] ^= 1;
    CHECK(!verify_block_evidence(garbled, s.ctx));

    // an honest block accused of reordering does not verify
    Block honest = s.make_block();
    ExposureEvidence bogus;
    bogus.kind = EvidenceKind::BlockViolation;
    bogus.predicate = EvidencePredicate::BlockReordering;
    bogus.accused = s.keys.pub;
    bogus.items = {honest.encode()};
    CHECK(!verify_block_evidence(bogus, s.ctx));
}
