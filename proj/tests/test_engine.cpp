#include <doctest.h>

#include <lo/engine.hpp>

#include <deque>
#include <tuple>

using namespace lo;

namespace {

Hash256 seed_of(uint64_t n)
{
    Hash256 h{};
    for (int i = 0; i < 8; ++i) h[size_t(i)] = uint8_t(n >> (8 * i));
    return h;
}

EngineParams test_params()
{
    EngineParams p;
    p.block.deploy.sketch_capacity = 8;
    p.block.require_content = false;
    p.censor_grace = 1000.0; // keep censorship checks quiet unless wanted
    return p;
}

/// Keypair whose public key lands on the requested equivocation side.
KeyPair keypair_with_parity(uint64_t seed_base, int parity)
{
    for (uint64_t n = 0;; ++n) {
        KeyPair k = derive_keypair(SigMode::Mac, seed_of(seed_base + n));
        if ((k.pub[0] & 1) == parity) return k;
    }
}

/// Instant-delivery message switchboard for a handful of engines.
struct Net {
    std::map<PublicKey, NodeEngine*> nodes;
    std::deque<std::tuple<PublicKey, PublicKey, Message>> queue;

    void add(NodeEngine& e) { nodes[e.pk()] = &e; }
    void post(const PublicKey& from, std::vector<Outgoing> out)
    {
        for (Outgoing& o : out) queue.emplace_back(from, o.to, std::move(o.msg));
    }
    void pump(double now)
    {
        while (!queue.empty()) {
            auto [from, to, msg] = std::move(queue.front());
            queue.pop_front();
            auto it = nodes.find(to);
            if (it != nodes.end()) post(to, it->second->on_message(from, msg, now));
        }
    }
    void tick_all(double now)
    {
        for (auto& [pk, e] : nodes) post(pk, e->sync_tick(now));
        pump(now);
    }
};

Transaction tx_from(const KeyPair& keys, int64_t fee, uint8_t tag)
{
    return make_transaction(keys, fee, {tag});
}

} // namespace

TEST_CASE("messages survive the wire")
{
    DeployParams dp;
    dp.sketch_capacity = 8;
    KeyPair keys = derive_keypair(dp.sig_mode, seed_of(1));
    Commitment head = commit_extend(std::nullopt, {tx_from(keys, 5, 1).id}, keys, dp);

    Message req;
    req.kind = MsgKind::CommitRequest;
    req.commitment = head;
    req.tx_ids = {tx_from(keys, 5, 1).id, tx_from(keys, 6, 2).id};
    req.ask_shortids = {gf::u128(7) << 40, 12345};
    Bytes wire = req.encode(dp);
    Message back = Message::decode(wire, dp);
    CHECK(back.kind == MsgKind::CommitRequest);
    CHECK(back.commitment == head);
    CHECK(back.tx_ids == req.tx_ids);
    CHECK(back.ask_shortids == req.ask_shortids);

    Message prom;
    prom.kind = MsgKind::CommitPromise;
    prom.ref = sha256(wire);
    prom.commitment = head;
    prom.tx_ids = {tx_from(keys, 9, 5).id};
    prom.ask_shortids = {99};
    prom.overflow = true;
    prom.txs = {tx_from(keys, 9, 5)};
    back = Message::decode(prom.encode(dp), dp);
    CHECK(back.ref == prom.ref);
    CHECK(back.commitment == head);
    CHECK(back.tx_ids == prom.tx_ids);
    CHECK(back.ask_shortids == prom.ask_shortids);
    CHECK(back.overflow);
    REQUIRE(back.txs.size() == 1);
    CHECK(back.txs[0].id == prom.txs[0].id);
    // pushed contents count as bare ids in the control accounting
    Message bare = prom;
    bare.txs.clear();
    CHECK(prom.control_size(dp) == bare.encode(dp).size() + 32);

    Message batch;
    batch.kind = MsgKind::TxBatch;
    batch.txs = {tx_from(keys, 7, 3), tx_from(keys, 8, 4)};
    back = Message::decode(batch.encode(dp), dp);
    REQUIRE(back.txs.size() == 2);
    CHECK(back.txs[0].id == batch.txs[0].id);
    CHECK(back.txs[1].payload == batch.txs[1].payload);
    // accounting strips payloads down to ids
    CHECK(batch.control_size(dp) == 1 + 4 + 64);
    CHECK(batch.control_size(dp) < batch.encode(dp).size());

    Message susp;
    susp.kind = MsgKind::SuspicionGossip;
    susp.subject = keys.pub;
    susp.reporter[3] = 9;
    back = Message::decode(susp.encode(dp), dp);
    CHECK(back.subject == susp.subject);
    CHECK(back.reporter == susp.reporter);

    Message expo;
    expo.kind = MsgKind::ExposureGossip;
    ExposureEvidence ev;
    ev.kind = EvidenceKind::Equivocation;
    ev.predicate = EvidencePredicate::ForkedParent;
    ev.accused = keys.pub;
    ev.items = {head.encode(), head.encode()};
    expo.evidence = ev;
    back = Message::decode(expo.encode(dp), dp);
    REQUIRE(back.evidence.has_value());
    CHECK(back.evidence->predicate == EvidencePredicate::ForkedParent);
    CHECK(back.evidence->items == ev.items);

    Message part;
    part.kind = MsgKind::SketchPartReply;
    part.ref = sha256(Bytes{1, 2, 3});
    part.part_bits = 3;
    part.part_prefix = 5;
    Sketch s = dp.make_sketch();
    s.add(42);
    part.part_sketch = s;
    back = Message::decode(part.encode(dp), dp);
    CHECK(back.part_bits == 3);
    CHECK(back.part_prefix == 5);
    CHECK(back.part_sketch == s);

    wire = req.encode(dp);
    wire.pop_back();
    CHECK_THROWS(Message::decode(wire, dp));
}

TEST_CASE("two honest nodes reconcile a transaction")
{
    EngineParams p = test_params();
    NodeEngine a(p, derive_keypair(SigMode::Mac, seed_of(10)), 1);
    NodeEngine b(p, derive_keypair(SigMode::Mac, seed_of(11)), 2);
    a.set_neighbors({b.pk()});
    b.set_neighbors({a.pk()});
    Net net;
    net.add(a);
    net.add(b);

    KeyPair user = derive_keypair(SigMode::Mac, seed_of(12));
    Transaction t0 = tx_from(user, 50, 0);
    a.submit_local(t0, 0.0);
    CHECK(a.head().seq == 1);

    net.tick_all(0.0);

    CHECK(b.pool().knows(t0.id));
    CHECK(b.knows_content(t0.id));
    CHECK(b.head().seq == 1); // promised as a new bundle
    CHECK(a.stats().reconciliations == 1);
    // both sides now hold each other's heads
    CHECK(a.stored().count(b.pk()) == 1);
    CHECK(b.stored().count(a.pk()) == 1);

    // nothing new: next tick must not re-promise or grow chains
    uint64_t seq_a = a.head().seq, seq_b = b.head().seq;
    net.tick_all(1.0);
    net.tick_all(2.0);
    CHECK(a.head().seq == seq_a);
    CHECK(b.head().seq == seq_b);
    CHECK(a.stats().suspicions_raised == 0);
    CHECK(a.exposed().empty());
    CHECK(b.exposed().empty());
}

TEST_CASE("unanswered requests escalate to suspicion and retract on reply")
{
    EngineParams p = test_params();
    NodeEngine a(p, derive_keypair(SigMode::Mac, seed_of(20)), 1);
    EngineParams silent = test_params();
    silent.adversary = AdversaryKind::NonResponder;
    NodeEngine nr(silent, derive_keypair(SigMode::Mac, seed_of(21)), 2);
    NodeEngine c(p, derive_keypair(SigMode::Mac, seed_of(22)), 3);
    a.set_neighbors({nr.pk()});
    c.set_neighbors({a.pk()});

    KeyPair user = derive_keypair(SigMode::Mac, seed_of(23));
    a.submit_local(tx_from(user, 5, 0), 0.0);
    std::vector<Outgoing> out = a.sync_tick(0.0);
    REQUIRE(!out.empty());
    CHECK(nr.on_message(a.pk(), out[0].msg, 0.0).empty()); // dropped

    int resends = 0;
    std::vector<Outgoing> gossip;
    for (double t = 1.0; t <= 8.0; t += 1.0) {
        std::vector<Outgoing> o = a.poll_timeouts(t);
        for (Outgoing& m : o) {
            if (m.msg.kind == MsgKind::CommitRequest) ++resends;
            if (m.msg.kind == MsgKind::SuspicionGossip) gossip.push_back(m);
        }
        if (!gossip.empty()) break;
    }
    CHECK(resends == 3);
    REQUIRE(!gossip.empty());
    CHECK(gossip[0].msg.subject == nr.pk());
    CHECK(a.suspicions().at(nr.pk()).count(a.pk()) == 1);
    CHECK(a.stats().suspicions_raised == 1);

    // gossip spreads exactly once per accusation
    std::vector<Outgoing> fwd = c.on_message(a.pk(), gossip[0].msg, 5.0);
    bool forwarded = false;
    for (Outgoing& m : fwd) forwarded |= m.msg.kind == MsgKind::SuspicionGossip;
    CHECK(forwarded);
    CHECK(c.on_message(a.pk(), gossip[0].msg, 5.0).empty());
    CHECK(c.suspicions().at(nr.pk()).count(a.pk()) == 1);

    // a live reply clears the accuser's own charge and floods a retract
    Message alive;
    alive.kind = MsgKind::CommitCurrent;
    alive.commitment = nr.head();
    std::vector<Outgoing> after = a.on_message(nr.pk(), alive, 6.0);
    bool retracted = false;
    for (Outgoing& m : after) retracted |= m.msg.kind == MsgKind::SuspicionRetract;
    CHECK(retracted);
    CHECK(a.suspicions().count(nr.pk()) == 0);
    CHECK(a.stats().retracts == 1);

    // the retract clears the charge at third parties too
    for (Outgoing& m : after)
        if (m.msg.kind == MsgKind::SuspicionRetract) (void)c.on_message(a.pk(), m.msg, 6.0);
    CHECK(c.suspicions().count(nr.pk()) == 0);
}

TEST_CASE("equivocating chains are exposed by a crossed sample")
{
    EngineParams ep = test_params();
    ep.adversary = AdversaryKind::Equivocator;
    NodeEngine evil(ep, derive_keypair(SigMode::Mac, seed_of(30)), 1);

    EngineParams hp = test_params();
    NodeEngine even_side(hp, keypair_with_parity(31, 0), 2);
    NodeEngine odd_side(hp, keypair_with_parity(200, 1), 3);
    evil.set_neighbors({even_side.pk(), odd_side.pk()});
    even_side.set_neighbors({evil.pk()});
    odd_side.set_neighbors({evil.pk()});

    KeyPair u1 = derive_keypair(SigMode::Mac, seed_of(32));
    even_side.submit_local(tx_from(u1, 5, 0), 0.0);
    odd_side.submit_local(tx_from(u1, 6, 1), 0.0);

    Net net;
    net.add(evil);
    net.add(even_side);
    net.add(odd_side);
    for (double t = 0; t < 4; t += 1) net.tick_all(t);

    // the two sides hold contradictory heads for the same author
    REQUIRE(even_side.stored().count(evil.pk()) == 1);
    REQUIRE(odd_side.stored().count(evil.pk()) == 1);
    const Commitment& side_a = even_side.stored().at(evil.pk());
    const Commitment& side_b = odd_side.stored().at(evil.pk());
    CHECK(side_a.hash() != side_b.hash());

    CHECK(even_side.exposed().empty());
    Message sample;
    sample.kind = MsgKind::CommitmentSample;
    sample.subject = evil.pk();
    sample.commitment = side_b;
    std::vector<Outgoing> out = even_side.on_message(odd_side.pk(), sample, 5.0);
    CHECK(even_side.exposed().count(evil.pk()) == 1);
    bool flooded = false;
    for (Outgoing& m : out)
        if (m.msg.kind == MsgKind::ExposureGossip) {
            flooded = true;
            // forwarded evidence re-verifies at a fresh node
            std::vector<Outgoing> relay = odd_side.on_message(even_side.pk(), m.msg, 5.0);
            CHECK(odd_side.exposed().count(evil.pk()) == 1);
            (void)relay;
        }
    CHECK(flooded);
}

TEST_CASE("oversized differences fall back to bisection")
{
    EngineParams p = test_params();
    NodeEngine a(p, derive_keypair(SigMode::Mac, seed_of(40)), 1);
    NodeEngine b(p, derive_keypair(SigMode::Mac, seed_of(41)), 2);
    a.set_neighbors({b.pk()});
    b.set_neighbors({a.pk()});
    Net net;
    net.add(a);
    net.add(b);

    KeyPair user = derive_keypair(SigMode::Mac, seed_of(42));
    b.submit_local(tx_from(user, 1, 255), 0.0);
    net.tick_all(0.0); // b pushes its tx; heads are mutually known

    for (uint8_t i = 0; i < 24; ++i) a.submit_local(tx_from(user, 10 + i, i), 1.0);
    for (double t = 1.0; t < 20.0; t += 1.0) net.tick_all(t);

    // the responder counts the failed whole-set decode; the requester
    // drives the partition rounds
    CHECK(a.stats().decode_failures + b.stats().decode_failures >= 1);
    CHECK(a.stats().bisect_rounds + b.stats().bisect_rounds >= 2);
    CHECK(b.pool().tx_count() == a.pool().tx_count());
    CHECK(b.pool().known() == a.pool().known());
    for (const TxId& id : a.pool().known()) CHECK(b.knows_content(id));
    CHECK(a.exposed().empty());
    CHECK(b.exposed().empty());
}

TEST_CASE("honest block flows through announcement and inspection")
{
    EngineParams p = test_params();
    NodeEngine a(p, derive_keypair(SigMode::Mac, seed_of(50)), 1);
    NodeEngine b(p, derive_keypair(SigMode::Mac, seed_of(51)), 2);
    NodeEngine c(p, derive_keypair(SigMode::Mac, seed_of(52)), 3);
    a.set_neighbors({b.pk(), c.pk()});
    b.set_neighbors({a.pk(), c.pk()});
    c.set_neighbors({a.pk(), b.pk()});
    Net net;
    net.add(a);
    net.add(b);
    net.add(c);

    KeyPair user = derive_keypair(SigMode::Mac, seed_of(53));
    for (uint8_t i = 0; i < 5; ++i) a.submit_local(tx_from(user, 10 + i, i), 0.0);
    for (double t = 0; t < 3; t += 1) net.tick_all(t);

    Block blk = a.make_block(1, kZeroHash, 3.0);
    CHECK(blk.tx_total() == 5);
    Message ann;
    ann.kind = MsgKind::BlockAnnounce;
    ann.block = blk;
    net.post(a.pk(), a.on_message(a.pk(), ann, 3.0));
    net.pump(3.0);

    for (NodeEngine* n : {&a, &b, &c}) {
        CHECK(n->chain_included().size() == 5);
        CHECK(n->exposed().empty());
    }

    // the chain retires the ids from future sync deltas
    uint64_t seq_b = b.head().seq;
    net.tick_all(4.0);
    CHECK(b.head().seq == seq_b);
}

TEST_CASE("an injected block transaction exposes its creator")
{
    EngineParams ep = test_params();
    ep.adversary = AdversaryKind::Injector;
    NodeEngine evil(ep, derive_keypair(SigMode::Mac, seed_of(60)), 1);
    NodeEngine h(test_params(), derive_keypair(SigMode::Mac, seed_of(61)), 2);
    evil.set_neighbors({h.pk()});
    h.set_neighbors({evil.pk()});
    Net net;
    net.add(evil);
    net.add(h);

    KeyPair user = derive_keypair(SigMode::Mac, seed_of(62));
    h.submit_local(tx_from(user, 5, 0), 0.0);
    for (double t = 0; t < 3; t += 1) net.tick_all(t);

    Block blk = evil.make_block(1, kZeroHash, 3.0);
    std::vector<Outgoing> out = h.on_message(evil.pk(), [&] {
        Message m;
        m.kind = MsgKind::BlockAnnounce;
        m.block = blk;
        return m;
    }(), 3.0);
    CHECK(h.exposed().count(evil.pk()) == 1);
    bool flooded = false;
    for (Outgoing& m : out) flooded |= m.msg.kind == MsgKind::ExposureGossip;
    CHECK(flooded);
}

TEST_CASE("a censoring leader drops the victim's transactions from its blocks")
{
    EngineParams ep = test_params();
    ep.adversary = AdversaryKind::MempoolCensor;
    KeyPair victim = derive_keypair(SigMode::Mac, seed_of(70));
    ep.victim = victim.pub;
    NodeEngine evil(ep, derive_keypair(SigMode::Mac, seed_of(71)), 1);
    NodeEngine h(test_params(), derive_keypair(SigMode::Mac, seed_of(72)), 2);
    evil.set_neighbors({h.pk()});
    h.set_neighbors({evil.pk()});
    Net net;
    net.add(evil);
    net.add(h);

    KeyPair other = derive_keypair(SigMode::Mac, seed_of(73));
    Transaction victim_tx = tx_from(victim, 100, 0);
    h.submit_local(victim_tx, 0.0);
    h.submit_local(tx_from(other, 5, 1), 0.0);
    h.submit_local(tx_from(other, 6, 2), 0.0);
    for (double t = 0; t < 3; t += 1) net.tick_all(t);
    REQUIRE(evil.knows_content(victim_tx.id));

    Block blk = evil.make_block(1, kZeroHash, 3.0);
    std::vector<TxId> ids = blk.all_tx_ids();
    CHECK(std::find(ids.begin(), ids.end(), victim_tx.id) == ids.end());
    CHECK(blk.tx_total() >= 1);
}
