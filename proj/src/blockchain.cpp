#include <lo/blockchain.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>

namespace lo {

Bytes Block::signing_bytes() const
{
    Bytes out;
    put_u64le(out, height);
    put_bytes(out, prev_hash);
    put_bytes(out, creator);
    put_bytes(out, commitment.encode());
    put_u32le(out, uint32_t(bundles.size()));
    for (const BlockBundle& b : bundles) {
        put_u64le(out, b.log_index);
        put_u64le(out, b.commit_seq);
        put_u32le(out, uint32_t(b.tx_ids.size()));
        for (const TxId& id : b.tx_ids) put_bytes(out, id.digest);
    }
    return out;
}

Bytes Block::encode() const
{
    Bytes out = signing_bytes();
    put_bytes(out, signature);
    return out;
}

Block Block::decode(std::span<const uint8_t> data, const DeployParams& params)
{
    Block blk(params);
    size_t pos = 0;
    auto need = [&](size_t n) {
        if (data.size() - pos < n) throw std::invalid_argument("block truncated");
    };
    need(8 + 32 + 32);
    blk.height = get_u64le(data.data());
    pos += 8;
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, blk.prev_hash.begin());
    pos += 32;
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, blk.creator.begin());
    pos += 32;
    size_t csize = commitment_wire_size(params);
    need(csize + 4);
    blk.commitment = Commitment::decode(data.subspan(pos, csize), params);
    pos += csize;
    uint32_t nbundles = get_u32le(data.data() + pos);
    pos += 4;
    blk.bundles.reserve(nbundles);
    for (uint32_t i = 0; i < nbundles; ++i) {
        need(8 + 8 + 4);
        BlockBundle b;
        b.log_index = get_u64le(data.data() + pos);
        pos += 8;
        b.commit_seq = get_u64le(data.data() + pos);
        pos += 8;
        uint32_t nids = get_u32le(data.data() + pos);
        pos += 4;
        need(size_t(nids) * 32);
        b.tx_ids.resize(nids);
        for (uint32_t j = 0; j < nids; ++j) {
            std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32,
                      b.tx_ids[j].digest.begin());
            pos += 32;
        }
        blk.bundles.push_back(std::move(b));
    }
    need(64);
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 64, blk.signature.begin());
    pos += 64;
    if (pos != data.size()) throw std::invalid_argument("block has trailing bytes");
    return blk;
}

std::vector<TxId> Block::all_tx_ids() const
{
    std::vector<TxId> out;
    for (const BlockBundle& b : bundles) out.insert(out.end(), b.tx_ids.begin(), b.tx_ids.end());
    return out;
}

size_t Block::tx_total() const
{
    size_t n = 0;
    for (const BlockBundle& b : bundles) n += b.tx_ids.size();
    return n;
}

Hash256 shuffle_seed(const Hash256& prev_hash, uint64_t log_index)
{
    Bytes buf(prev_hash.begin(), prev_hash.end());
    put_u64le(buf, log_index);
    return tagged_hash("lo/shuffle", buf);
}

std::vector<TxId> canonical_shuffle(std::vector<TxId> ids, const Hash256& seed)
{
    std::sort(ids.begin(), ids.end());
    uint64_t counter = 0;
    std::array<uint64_t, 4> pool{};
    size_t pool_pos = 4;
    auto next_word = [&]() -> uint64_t {
        if (pool_pos == 4) {
            Bytes buf(seed.begin(), seed.end());
            put_u64le(buf, counter++);
            Hash256 h = sha256(buf);
            for (int i = 0; i < 4; ++i) pool[size_t(i)] = get_u64le(h.data() + 8 * i);
            pool_pos = 0;
        }
        return pool[pool_pos++];
    };
    auto draw_below = [&](uint64_t n) -> uint64_t {
        uint64_t threshold = (-n) % n; // rejection zone keeps the draw unbiased
        for (;;) {
            uint64_t w = next_word();
            if (w >= threshold) return w % n;
        }
    };
    for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[draw_below(i)]);
    return ids;
}

namespace {

std::vector<TxId> ordered_bundle(std::vector<TxId> ids, IntraBundleOrder ordering,
                                 const Hash256& prev_hash, uint64_t log_index)
{
    if (ordering == IntraBundleOrder::Sorted) {
        std::sort(ids.begin(), ids.end());
        return ids;
    }
    return canonical_shuffle(std::move(ids), shuffle_seed(prev_hash, log_index));
}

} // namespace

Block build_block(const MempoolLog& pool, const Commitment& head, uint64_t height,
                  const Hash256& prev_hash, const std::set<TxId>& chain_included,
                  const KeyPair& keys, const BlockParams& params)
{
    Block blk(params.deploy);
    blk.height = height;
    blk.prev_hash = prev_hash;
    blk.creator = keys.pub;
    blk.commitment = head;

    size_t total = 0;
    for (const Bundle& bundle : pool.bundles()) {
        if (params.max_block_txs && total >= params.max_block_txs) break;
        std::vector<TxId> keep;
        for (const TxId& id : bundle.tx_ids) {
            if (chain_included.count(id)) continue;
            const Transaction* tx = pool.content(id);
            if (!tx && params.require_content) continue;
            if (tx && prevalidate(*tx, params.deploy.sig_mode, params.min_fee) != TxCheck::Valid)
                continue;
            keep.push_back(id);
        }
        if (keep.empty()) continue;
        // blockspace truncation picks the lowest ids, then orders the pick
        if (params.max_block_txs && total + keep.size() > params.max_block_txs)
            keep.resize(params.max_block_txs - total);
        total += keep.size();
        BlockBundle bb;
        bb.log_index = bundle.index;
        bb.commit_seq = bundle.commit_seq;
        bb.tx_ids = ordered_bundle(std::move(keep), params.ordering, prev_hash, bundle.index);
        blk.bundles.push_back(std::move(bb));
    }
    blk.signature = sign_bytes(keys, blk.signing_bytes());
    return blk;
}

InspectResult inspect_block(const Block& block, const InspectContext& ctx)
{
    const DeployParams& dp = ctx.params.deploy;
    InspectResult res;

    if (block.creator != block.commitment.author) {
        res.verdict = BlockVerdict::Unresolvable;
        res.note = "commitment author mismatch";
        return res;
    }
    if (verify_commitment(block.commitment, dp) != CommitCheck::Ok) {
        res.verdict = BlockVerdict::Unresolvable;
        res.note = "embedded commitment does not verify";
        return res;
    }
    if (!verify_bytes(dp.sig_mode, block.creator, block.signing_bytes(), block.signature)) {
        res.verdict = BlockVerdict::Unresolvable;
        res.note = "block signature does not verify";
        return res;
    }

    auto accuse = [&](EvidencePredicate pred, std::string note) {
        res.verdict = BlockVerdict::Evidence;
        ExposureEvidence ev;
        ev.kind = EvidenceKind::BlockViolation;
        ev.predicate = pred;
        ev.accused = block.creator;
        ev.items = {block.encode()};
        res.evidence = std::move(ev);
        res.note = std::move(note);
        return res;
    };

    // duplicate inclusion is injection relative to the grow-only promise
    std::vector<TxId> block_ids = block.all_tx_ids();
    std::set<TxId> block_set;
    for (const TxId& id : block_ids) {
        if (!block_set.insert(id).second)
            return accuse(EvidencePredicate::BlockInjection, "transaction included twice");
        if (ctx.chain_included.count(id))
            return accuse(EvidencePredicate::BlockInjection, "transaction already on chain");
    }

    // difference between the committed set and everything included so far
    Sketch diff = block.commitment.sketch;
    Sketch included = dp.make_sketch();
    std::map<gf::u128, const TxId*> in_block, on_chain;
    for (const TxId& id : block_set) {
        gf::u128 e = dp.short_id_of(id);
        included.add(e);
        in_block.emplace(e, &id);
    }
    for (const TxId& id : ctx.chain_included) {
        gf::u128 e = dp.short_id_of(id);
        included.add(e);
        on_chain.emplace(e, &id);
    }
    diff.merge(included);
    auto decoded = diff.decode();
    if (!decoded) {
        res.verdict = BlockVerdict::Unresolvable;
        res.note = "set difference exceeds sketch capacity";
        return res;
    }

    std::map<gf::u128, const TxId*> due;
    for (const TxId& id : ctx.expected_available) due.emplace(dp.short_id_of(id), &id);

    size_t censored_due = 0;
    for (gf::u128 e : *decoded) {
        if (in_block.count(e))
            return accuse(EvidencePredicate::BlockInjection, "transaction never committed");
        if (on_chain.count(e)) continue; // on chain before the creator promised it
        if (due.count(e)) ++censored_due; // promised, due, and left out
    }
    bool has_space = ctx.params.max_block_txs == 0 || block.tx_total() < ctx.params.max_block_txs;
    if (censored_due > 0 && has_space)
        return accuse(EvidencePredicate::BlockspaceCensorship,
                      "due transactions omitted with blockspace to spare");

    for (const BlockBundle& b : block.bundles) {
        std::vector<TxId> expected =
            ordered_bundle(b.tx_ids, ctx.params.ordering, block.prev_hash, b.log_index);
        if (expected != b.tx_ids)
            return accuse(EvidencePredicate::BlockReordering, "intra-bundle order violated");
    }

    res.verdict = BlockVerdict::Valid;
    return res;
}

bool verify_block_evidence(const ExposureEvidence& ev, const InspectContext& ctx)
{
    if (ev.kind != EvidenceKind::BlockViolation || ev.items.size() != 1) return false;
    Block blk(ctx.params.deploy);
    try {
        blk = Block::decode(ev.items[0], ctx.params.deploy);
    } catch (const std::exception&) {
        return false;
    }
    if (blk.creator != ev.accused) return false;
    InspectResult res = inspect_block(blk, ctx);
    return res.verdict == BlockVerdict::Evidence && res.evidence &&
           res.evidence->predicate == ev.predicate;
}

} // namespace lo
