#include <lo/engine.hpp>

#include <algorithm>
#include <stdexcept>

namespace lo {

namespace {

Bytes evidence_bytes(const ExposureEvidence& ev)
{
    Bytes out;
    out.push_back(uint8_t(ev.kind));
    out.push_back(uint8_t(ev.predicate));
    put_bytes(out, ev.accused);
    put_u32le(out, uint32_t(ev.items.size()));
    for (const Bytes& item : ev.items) put_field(out, item);
    return out;
}

ExposureEvidence evidence_from(std::span<const uint8_t> data, size_t& pos)
{
    auto need = [&](size_t n) {
        if (data.size() - pos < n) throw std::invalid_argument("evidence truncated");
    };
    ExposureEvidence ev;
    need(2 + 32 + 4);
    ev.kind = EvidenceKind(data[pos++]);
    ev.predicate = EvidencePredicate(data[pos++]);
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, ev.accused.begin());
    pos += 32;
    uint32_t n = get_u32le(data.data() + pos);
    pos += 4;
    for (uint32_t i = 0; i < n; ++i) {
        need(4);
        uint32_t len = get_u32le(data.data() + pos);
        pos += 4;
        need(len);
        ev.items.emplace_back(data.begin() + long(pos), data.begin() + long(pos) + len);
        pos += len;
    }
    return ev;
}

void put_ids(Bytes& out, const std::vector<TxId>& ids)
{
    put_u32le(out, uint32_t(ids.size()));
    for (const TxId& id : ids) put_bytes(out, id.digest);
}

std::vector<TxId> get_ids(std::span<const uint8_t> data, size_t& pos)
{
    if (data.size() - pos < 4) throw std::invalid_argument("id list truncated");
    uint32_t n = get_u32le(data.data() + pos);
    pos += 4;
    if (data.size() - pos < size_t(n) * 32) throw std::invalid_argument("id list truncated");
    std::vector<TxId> ids(n);
    for (uint32_t i = 0; i < n; ++i) {
        std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32,
                  ids[i].digest.begin());
        pos += 32;
    }
    return ids;
}

void put_shortids(Bytes& out, const std::vector<gf::u128>& elems, size_t elem_bytes)
{
    put_u32le(out, uint32_t(elems.size()));
    for (gf::u128 e : elems)
        for (size_t i = 0; i < elem_bytes; ++i)
            out.push_back(uint8_t(e >> (8 * (elem_bytes - 1 - i))));
}

std::vector<gf::u128> get_shortids(std::span<const uint8_t> data, size_t& pos, size_t elem_bytes)
{
    if (data.size() - pos < 4) throw std::invalid_argument("shortid list truncated");
    uint32_t n = get_u32le(data.data() + pos);
    pos += 4;
    if (data.size() - pos < size_t(n) * elem_bytes)
        throw std::invalid_argument("shortid list truncated");
    std::vector<gf::u128> elems(n, 0);
    for (uint32_t i = 0; i < n; ++i)
        for (size_t j = 0; j < elem_bytes; ++j)
            elems[i] = (elems[i] << 8) | data[pos++];
    return elems;
}

} // namespace

Bytes Message::encode(const DeployParams& params) const
{
    Bytes out;
    out.push_back(uint8_t(kind));
    switch (kind) {
    case MsgKind::CommitRequest:
        put_bytes(out, commitment->encode());
        put_ids(out, tx_ids);
        put_ids(out, want_ids);
        put_shortids(out, ask_shortids, size_t(params.field_bits) / 8);
        break;
    case MsgKind::CommitPromise:
    case MsgKind::CommitCurrent:
        put_bytes(out, ref);
        put_bytes(out, commitment->encode());
        put_ids(out, tx_ids);
        put_ids(out, want_ids);
        put_shortids(out, ask_shortids, size_t(params.field_bits) / 8);
        out.push_back(overflow ? 1 : 0);
        put_u32le(out, uint32_t(txs.size()));
        for (const Transaction& tx : txs) put_field(out, tx.encode());
        break;
    case MsgKind::TxBatch:
        put_u32le(out, uint32_t(txs.size()));
        for (const Transaction& tx : txs) put_field(out, tx.encode());
        break;
    case MsgKind::SuspicionGossip:
    case MsgKind::SuspicionRetract:
        put_bytes(out, subject);
        put_bytes(out, reporter);
        break;
    case MsgKind::ExposureGossip:
        put_field(out, evidence_bytes(*evidence));
        break;
    case MsgKind::CommitmentSample:
        put_bytes(out, commitment->encode());
        break;
    case MsgKind::BlockAnnounce:
        put_field(out, block->encode());
        break;
    case MsgKind::SketchPartRequest:
        out.push_back(part_bits);
        put_u32le(out, part_prefix);
        break;
    case MsgKind::SketchPartReply:
        put_bytes(out, ref);
        out.push_back(part_bits);
        put_u32le(out, part_prefix);
        put_bytes(out, part_sketch->serialize());
        break;
    }
    (void)params;
    return out;
}

Message Message::decode(std::span<const uint8_t> data, const DeployParams& params)
{
    if (data.empty()) throw std::invalid_argument("empty message");
    Message m;
    m.kind = MsgKind(data[0]);
    size_t pos = 1;
    auto need = [&](size_t n) {
        if (data.size() - pos < n) throw std::invalid_argument("message truncated");
    };
    size_t csize = commitment_wire_size(params);
    auto take_commitment = [&] {
        need(csize);
        m.commitment = Commitment::decode(data.subspan(pos, csize), params);
        pos += csize;
    };
    auto take_hash = [&](Hash256& h) {
        need(32);
        std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, h.begin());
        pos += 32;
    };
    auto take_field = [&]() -> Bytes {
        need(4);
        uint32_t len = get_u32le(data.data() + pos);
        pos += 4;
        need(len);
        Bytes b(data.begin() + long(pos), data.begin() + long(pos) + len);
        pos += len;
        return b;
    };
    switch (m.kind) {
    case MsgKind::CommitRequest:
        take_commitment();
        m.tx_ids = get_ids(data, pos);
        m.want_ids = get_ids(data, pos);
        m.ask_shortids = get_shortids(data, pos, size_t(params.field_bits) / 8);
        break;
    case MsgKind::CommitPromise:
    case MsgKind::CommitCurrent: {
        take_hash(m.ref);
        take_commitment();
        m.tx_ids = get_ids(data, pos);
        m.want_ids = get_ids(data, pos);
        m.ask_shortids = get_shortids(data, pos, size_t(params.field_bits) / 8);
        need(5);
        m.overflow = data[pos++] != 0;
        uint32_t n = get_u32le(data.data() + pos);
        pos += 4;
        for (uint32_t i = 0; i < n; ++i) m.txs.push_back(Transaction::decode(take_field()));
        break;
    }
    case MsgKind::TxBatch: {
        need(4);
        uint32_t n = get_u32le(data.data() + pos);
        pos += 4;
        for (uint32_t i = 0; i < n; ++i) m.txs.push_back(Transaction::decode(take_field()));
        break;
    }
    case MsgKind::SuspicionGossip:
    case MsgKind::SuspicionRetract: {
        need(64);
        std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, m.subject.begin());
        pos += 32;
        std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, m.reporter.begin());
        pos += 32;
        break;
    }
    case MsgKind::ExposureGossip: {
        Bytes body = take_field();
        size_t epos = 0;
        m.evidence = evidence_from(body, epos);
        break;
    }
    case MsgKind::CommitmentSample:
        take_commitment();
        break;
    case MsgKind::BlockAnnounce:
        m.block = Block::decode(take_field(), params);
        break;
    case MsgKind::SketchPartRequest:
        need(5);
        m.part_bits = data[pos++];
        m.part_prefix = get_u32le(data.data() + pos);
        pos += 4;
        break;
    case MsgKind::SketchPartReply: {
        take_hash(m.ref);
        need(5);
        m.part_bits = data[pos++];
        m.part_prefix = get_u32le(data.data() + pos);
        pos += 4;
        size_t ssize = size_t(params.sketch_capacity) * size_t(params.field_bits) / 8;
        need(ssize);
        m.part_sketch = Sketch::deserialize(data.subspan(pos, ssize), params.sketch_capacity,
                                            params.field_bits);
        pos += ssize;
        break;
    }
    default:
        throw std::invalid_argument("unknown message kind");
    }
    if (pos != data.size()) throw std::invalid_argument("message has trailing bytes");
    return m;
}

size_t Message::control_size(const DeployParams& params) const
{
    if (kind == MsgKind::TxBatch) return 1 + 4 + 32 * txs.size();
    size_t sz = encode(params).size();
    if (kind == MsgKind::CommitPromise || kind == MsgKind::CommitCurrent)
        for (const Transaction& tx : txs) sz -= 4 + tx.encode().size() - 32;
    return sz;
}

NodeEngine::NodeEngine(EngineParams params, KeyPair keys, uint64_t rng_seed)
    : params_(std::move(params)),
      keys_(std::move(keys)),
      rng_(rng_seed),
      head_a_(commit_extend(std::nullopt, {}, keys_, params_.block.deploy)),
      head_b_(head_a_),
      my_sketch_(params_.block.deploy.make_sketch())
{
}

void NodeEngine::set_neighbors(std::vector<PublicKey> out_neighbors)
{
    neighbors_ = std::move(out_neighbors);
}

bool NodeEngine::equivocating() const
{
    return params_.adversary == AdversaryKind::Equivocator ||
           params_.adversary == AdversaryKind::MempoolCensor ||
           params_.adversary == AdversaryKind::ColludingCensor;
}

bool NodeEngine::b_side(const PublicKey& peer) const
{
    return (peer[0] & 1) != 0;
}

const Commitment& NodeEngine::head_for(const PublicKey& peer) const
{
    return equivocating() && b_side(peer) ? head_b_ : head_a_;
}

std::vector<TxId> NodeEngine::second_chain_filter(const std::vector<TxId>& ids) const
{
    std::vector<TxId> out;
    for (const TxId& id : ids) {
        if (params_.adversary != AdversaryKind::Equivocator) {
            const Transaction* tx = pool_.content(id);
            if (tx && tx->creator == params_.victim) continue;
        }
        out.push_back(id);
    }
    if (!out.empty()) out.erase(out.begin()); // guarantees the chains diverge
    return out;
}

void NodeEngine::append_promised(const std::vector<TxId>& ids, std::optional<PublicKey> source)
{
    const Bundle* b = pool_.append_bundle(ids, std::move(source), head_a_.seq + 1);
    if (!b) return;
    const DeployParams& dp = params_.block.deploy;
    for (const TxId& id : b->tx_ids) {
        gf::u128 e = dp.short_id_of(id);
        my_sketch_.add(e);
        index_.emplace(e, id);
        if (!pool_.has_content(id)) missing_.insert(id);
    }
    head_a_ = commit_extend(head_a_, b->tx_ids, keys_, dp);
    if (equivocating())
        head_b_ = commit_extend(head_b_, second_chain_filter(b->tx_ids), keys_, dp);
}

void NodeEngine::submit_local(const Transaction& tx, double now)
{
    if (prevalidate(tx, params_.block.deploy.sig_mode, params_.block.min_fee) != TxCheck::Valid)
        return;
    append_promised({tx.id}, std::nullopt);
    if (pool_.add_content(tx)) {
        content_time_.emplace(tx.id, now);
        missing_.erase(tx.id);
    }
}

void NodeEngine::flood(const Message& m, std::vector<Outgoing>& out)
{
    for (const PublicKey& n : neighbors_) out.push_back({n, m});
}

void NodeEngine::maybe_sample(const PublicKey& peer, std::vector<Outgoing>& out)
{
    if (latest_.empty() || rng_.uniform() >= params_.sample_prob) return;
    auto it = latest_.begin();
    std::advance(it, long(rng_.below(latest_.size())));
    Message s;
    s.kind = MsgKind::CommitmentSample;
    s.subject = it->first;
    s.commitment = it->second;
    out.push_back({peer, s});
}

std::vector<TxId> NodeEngine::want_list() const
{
    std::vector<TxId> want;
    for (const TxId& id : missing_) {
        if (want.size() >= 128) break;
        want.push_back(id);
    }
    return want;
}

void NodeEngine::serve_batch(const PublicKey& peer, const std::vector<TxId>& first,
                             const std::vector<TxId>& second, std::vector<Outgoing>& out)
{
    Message batch;
    batch.kind = MsgKind::TxBatch;
    std::set<TxId> seen;
    for (const std::vector<TxId>* ids : {&first, &second}) {
        for (const TxId& id : *ids) {
            if (!seen.insert(id).second) continue;
            const Transaction* tx = pool_.content(id);
            if (tx) batch.txs.push_back(*tx);
        }
    }
    if (!batch.txs.empty()) out.push_back({peer, std::move(batch)});
}

void NodeEngine::open_request(const PublicKey& peer, std::vector<TxId> delta,
                              std::vector<gf::u128> asks, double now,
                              std::vector<Outgoing>& out)
{
    Message m;
    m.kind = MsgKind::CommitRequest;
    m.commitment = head_for(peer);
    m.tx_ids = delta;
    m.ask_shortids = std::move(asks);
    m.want_ids = want_list();
    Pending p;
    p.ref = sha256(m.encode(params_.block.deploy));
    p.request = m;
    p.sent_at = now;
    p.attempts = 1;
    p.delta = std::move(delta);
    pending_[peer] = std::move(p);
    out.push_back({peer, std::move(m)});
}

void NodeEngine::open_part_request(const PublicKey& peer, double now, std::vector<Outgoing>& out)
{
    Bisect& bs = bisect_[peer];
    auto [bits, prefix] = bs.todo.back();
    bs.todo.pop_back();
    Message m;
    m.kind = MsgKind::SketchPartRequest;
    m.part_bits = bits;
    m.part_prefix = prefix;
    Pending p;
    p.ref = sha256(m.encode(params_.block.deploy));
    p.request = m;
    p.sent_at = now;
    p.attempts = 1;
    pending_[peer] = std::move(p);
    stats_.bisect_rounds += 1;
    out.push_back({peer, std::move(m)});
}

Sketch NodeEngine::partition_sketch(uint8_t bits, uint32_t prefix) const
{
    const DeployParams& dp = params_.block.deploy;
    Sketch s = dp.make_sketch();
    int shift = dp.field_bits - int(bits);
    for (const auto& [e, id] : index_)
        if (uint32_t(e >> shift) == prefix) s.add(e);
    return s;
}

std::vector<Outgoing> NodeEngine::sync_tick(double now)
{
    std::vector<Outgoing> out;
    if (params_.adversary == AdversaryKind::NonResponder) return out;

    std::vector<PublicKey> pick;
    for (const PublicKey& n : neighbors_)
        if (!exposed_.count(n)) pick.push_back(n);
    size_t want = std::min(size_t(params_.sync_fanout), pick.size());
    for (size_t i = 0; i < want; ++i)
        std::swap(pick[i], pick[i + rng_.below(pick.size() - i)]);
    pick.resize(want);

    bool have_wants = !missing_.empty();
    for (const PublicKey& peer : pick) {
        if (pending_.count(peer)) continue;
        maybe_sample(peer, out);
        auto it = latest_.find(peer);
        if (it == latest_.end()) {
            // first contact: offer a blind prefix of the local set so the
            // peer can store a head and promise something immediately
            std::vector<TxId> delta;
            for (const TxId& id : pool_.known()) {
                if (delta.size() >= params_.first_contact_cap) break;
                delta.push_back(id);
            }
            if (delta.empty() && head_for(peer).seq == 0 && !have_wants) continue;
            open_request(peer, std::move(delta), {}, now, out);
            continue;
        }
        // The responder decodes against the fresh head it receives; the
        // stored head only suppresses requests once both sides agree.
        Sketch diff = my_sketch_;
        diff.merge(it->second.sketch);
        if (diff.is_zero() && !have_wants) continue;
        open_request(peer, {}, {}, now, out);
    }
    return out;
}

void NodeEngine::raise_suspicion(const PublicKey& suspect, double now, std::vector<Outgoing>& out)
{
    (void)now;
    if (exposed_.count(suspect)) return;
    if (!suspicions_[suspect].insert(keys_.pub).second) return;
    stats_.suspicions_raised += 1;
    Message m;
    m.kind = MsgKind::SuspicionGossip;
    m.subject = suspect;
    m.reporter = keys_.pub;
    flood(m, out);
}

std::vector<Outgoing> NodeEngine::poll_timeouts(double now)
{
    std::vector<Outgoing> out;
    if (params_.adversary == AdversaryKind::NonResponder) return out;
    for (auto it = pending_.begin(); it != pending_.end();) {
        Pending& p = it->second;
        if (now - p.sent_at + 1e-9 < params_.sync_timeout) {
            ++it;
            continue;
        }
        if (p.attempts <= params_.max_resends) {
            p.attempts += 1;
            p.sent_at = now;
            out.push_back({it->first, p.request});
            ++it;
            continue;
        }
        PublicKey peer = it->first;
        it = pending_.erase(it);
        bisect_.erase(peer);
        raise_suspicion(peer, now, out);
    }
    return out;
}

void NodeEngine::accept_exposure(const ExposureEvidence& ev, double now,
                                 std::vector<Outgoing>& out)
{
    if (ev.accused == keys_.pub) return;
    if (!exposed_.emplace(ev.accused, now).second) return;
    suspicions_.erase(ev.accused);
    Message m;
    m.kind = MsgKind::ExposureGossip;
    m.evidence = ev;
    flood(m, out);
}

void NodeEngine::learn_commitment(const PublicKey& author, const Commitment& c, double now,
                                  std::vector<Outgoing>& out)
{
    if (author == keys_.pub || c.author != author) return;
    if (verify_commitment(c, params_.block.deploy) != CommitCheck::Ok) return;
    auto it = latest_.find(author);
    if (it == latest_.end()) {
        latest_.emplace(author, c);
        return;
    }
    auto ev = check_chain_consistency(it->second, c, params_.block.deploy);
    if (ev) accept_exposure(*ev, now, out);
    if (c.seq > it->second.seq) it->second = c;
}

std::set<TxId> NodeEngine::due_set(double now) const
{
    std::set<TxId> due;
    for (const auto& [id, t] : content_time_)
        if (now - t >= params_.censor_grace && !chain_included_.count(id)) due.insert(id);
    return due;
}

InspectContext NodeEngine::inspect_ctx(double now) const
{
    InspectContext ctx;
    ctx.params = params_.block;
    ctx.chain_included = chain_included_;
    ctx.expected_available = due_set(now);
    return ctx;
}

void NodeEngine::handle_block(const Block& blk, double now, std::vector<Outgoing>& out)
{
    if (!seen_blocks_.insert(blk.hash()).second) return;
    Message ann;
    ann.kind = MsgKind::BlockAnnounce;
    ann.block = blk;
    flood(ann, out);

    learn_commitment(blk.creator, blk.commitment, now, out);
    if (blk.creator != keys_.pub && !exposed_.count(blk.creator)) {
        InspectResult res = inspect_block(blk, inspect_ctx(now));
        if (res.verdict == BlockVerdict::Evidence && res.evidence)
            accept_exposure(*res.evidence, now, out);
    }
    for (const TxId& id : blk.all_tx_ids()) chain_included_.insert(id);
}

std::vector<Outgoing> NodeEngine::on_message(const PublicKey& from, const Message& m, double now)
{
    std::vector<Outgoing> out;
    if (params_.adversary == AdversaryKind::NonResponder) return out;
    if (exposed_.count(from) &&
        m.kind != MsgKind::ExposureGossip && m.kind != MsgKind::BlockAnnounce)
        return out;

    const DeployParams& dp = params_.block.deploy;

    // any direct reply from a node this one suspected clears the charge
    if (m.kind == MsgKind::CommitPromise || m.kind == MsgKind::CommitCurrent ||
        m.kind == MsgKind::SketchPartReply) {
        auto sit = suspicions_.find(from);
        if (sit != suspicions_.end() && sit->second.erase(keys_.pub)) {
            stats_.retracts += 1;
            if (sit->second.empty()) suspicions_.erase(sit);
            Message r;
            r.kind = MsgKind::SuspicionRetract;
            r.subject = from;
            r.reporter = keys_.pub;
            retracts_seen_.insert({keys_.pub, from});
            flood(r, out);
        }
    }

    switch (m.kind) {
    case MsgKind::CommitRequest: {
        if (!m.commitment) break;
        learn_commitment(from, *m.commitment, now, out);
        Hash256 rh = sha256(m.encode(dp));
        // ids already on chain are still promised so that committed sets
        // converge and set differences between peers stay small
        std::vector<TxId> fresh;
        for (const TxId& id : m.tx_ids)
            if (!pool_.knows(id)) fresh.push_back(id);
        Message reply;
        reply.ref = rh;
        reply.kind = fresh.empty() ? MsgKind::CommitCurrent : MsgKind::CommitPromise;
        std::set<TxId> offered(m.tx_ids.begin(), m.tx_ids.end());
        if (!fresh.empty()) append_promised(fresh, from);
        // name the elements the requester could not map on its own
        std::set<TxId> push_set;
        for (gf::u128 e : m.ask_shortids) {
            auto hit = index_.find(e);
            if (hit != index_.end() && !offered.count(hit->second)) push_set.insert(hit->second);
        }
        // one decode per exchange, against the requester's fresh head:
        // our side of the difference is pushed by id, the requester's side
        // is echoed back as shortids for it to name
        Sketch diff = my_sketch_;
        diff.merge(m.commitment->sketch);
        if (!diff.is_zero()) {
            auto decoded = diff.decode();
            if (!decoded) {
                stats_.decode_failures += 1;
                reply.overflow = true;
            } else {
                for (gf::u128 e : *decoded) {
                    auto hit = index_.find(e);
                    if (hit == index_.end())
                        reply.ask_shortids.push_back(e);
                    else if (!offered.count(hit->second))
                        push_set.insert(hit->second);
                }
            }
        }
        if (equivocating() && b_side(from) && params_.adversary != AdversaryKind::Equivocator)
            std::erase_if(push_set, [&](const TxId& id) {
                const Transaction* tx = pool_.content(id);
                return tx && tx->creator == params_.victim;
            });
        reply.tx_ids.assign(push_set.begin(), push_set.end());
        for (const TxId& id : reply.tx_ids) {
            const Transaction* tx = pool_.content(id);
            if (tx) reply.txs.push_back(*tx);
        }
        reply.commitment = head_for(from);
        reply.want_ids = want_list();
        out.push_back({from, std::move(reply)});
        std::vector<TxId> want_serve;
        for (const TxId& id : m.want_ids)
            if (!push_set.count(id)) want_serve.push_back(id);
        serve_batch(from, want_serve, {}, out);
        break;
    }
    case MsgKind::CommitPromise:
    case MsgKind::CommitCurrent: {
        if (!m.commitment) break;
        // pushed ids and contents stand on their own, so adopt them even
        // when the reply raced a re-sent request
        if (!m.tx_ids.empty()) append_promised(m.tx_ids, from);
        for (const Transaction& tx : m.txs) {
            if (tx_id(tx) != tx.id) continue;
            if (prevalidate(tx, dp.sig_mode, params_.block.min_fee) != TxCheck::Valid) continue;
            if (pool_.add_content(tx)) {
                content_time_.emplace(tx.id, now);
                missing_.erase(tx.id);
            }
        }
        auto it = pending_.find(from);
        bool matched = it != pending_.end() && it->second.ref == m.ref;
        if (matched) {
            Pending p = std::move(it->second);
            pending_.erase(it);
            if (m.kind == MsgKind::CommitPromise) {
                stats_.reconciliations += 1;
                serve_batch(from, p.delta, m.want_ids, out);
            } else {
                serve_batch(from, m.want_ids, {}, out);
            }
            // name our side of the difference for the responder
            std::vector<TxId> named;
            for (gf::u128 e : m.ask_shortids) {
                auto hit = index_.find(e);
                if (hit != index_.end()) named.push_back(hit->second);
            }
            if (m.overflow && !bisect_.count(from)) {
                Bisect bs;
                bs.todo = {{1, 1}, {1, 0}};
                bisect_[from] = std::move(bs);
                open_part_request(from, now, out);
            } else if (!named.empty()) {
                open_request(from, std::move(named), {}, now, out);
            }
        }
        learn_commitment(from, *m.commitment, now, out);
        break;
    }
    case MsgKind::TxBatch: {
        for (const Transaction& tx : m.txs) {
            if (tx_id(tx) != tx.id) continue;
            if (prevalidate(tx, dp.sig_mode, params_.block.min_fee) != TxCheck::Valid) continue;
            if (pool_.add_content(tx)) {
                content_time_.emplace(tx.id, now);
                missing_.erase(tx.id);
            }
        }
        break;
    }
    case MsgKind::SuspicionGossip: {
        if (exposed_.count(m.subject)) break;
        if (m.subject == keys_.pub) {
            Message alive;
            alive.kind = MsgKind::CommitCurrent;
            alive.ref = kZeroHash;
            alive.commitment = head_for(m.reporter);
            out.push_back({m.reporter, std::move(alive)});
            break;
        }
        if (suspicions_[m.subject].insert(m.reporter).second) {
            flood(m, out);
            auto it = latest_.find(m.subject);
            if (it != latest_.end()) {
                Message s;
                s.kind = MsgKind::CommitmentSample;
                s.subject = m.subject;
                s.commitment = it->second;
                out.push_back({m.reporter, std::move(s)});
            }
        }
        break;
    }
    case MsgKind::SuspicionRetract: {
        if (retracts_seen_.insert({m.reporter, m.subject}).second) {
            auto it = suspicions_.find(m.subject);
            if (it != suspicions_.end()) {
                it->second.erase(m.reporter);
                if (it->second.empty()) suspicions_.erase(it);
            }
            flood(m, out);
        }
        break;
    }
    case MsgKind::ExposureGossip: {
        if (!m.evidence || exposed_.count(m.evidence->accused)) break;
        bool valid = false;
        if (m.evidence->kind == EvidenceKind::Equivocation)
            valid = verify_commitment_evidence(*m.evidence, dp);
        else if (m.evidence->kind == EvidenceKind::BlockViolation)
            valid = verify_block_evidence(*m.evidence, inspect_ctx(now));
        if (valid) accept_exposure(*m.evidence, now, out);
        break;
    }
    case MsgKind::CommitmentSample: {
        if (m.commitment) learn_commitment(m.commitment->author, *m.commitment, now, out);
        break;
    }
    case MsgKind::BlockAnnounce: {
        if (m.block) handle_block(*m.block, now, out);
        break;
    }
    case MsgKind::SketchPartRequest: {
        Message reply;
        reply.kind = MsgKind::SketchPartReply;
        reply.ref = sha256(m.encode(dp));
        reply.part_bits = m.part_bits;
        reply.part_prefix = m.part_prefix;
        reply.part_sketch = partition_sketch(m.part_bits, m.part_prefix);
        out.push_back({from, std::move(reply)});
        break;
    }
    case MsgKind::SketchPartReply: {
        auto it = pending_.find(from);
        if (it == pending_.end() || it->second.ref != m.ref || !m.part_sketch) break;
        pending_.erase(it);
        auto bit = bisect_.find(from);
        if (bit == bisect_.end()) break;
        Bisect& bs = bit->second;
        Sketch mine = partition_sketch(m.part_bits, m.part_prefix);
        mine.merge(*m.part_sketch);
        auto decoded = mine.decode();
        if (decoded) {
            for (gf::u128 e : *decoded) {
                auto hit = index_.find(e);
                if (hit != index_.end())
                    bs.delta.push_back(hit->second);
                else
                    bs.asks.push_back(e);
            }
        } else if (int(m.part_bits) < params_.bisect_depth) {
            bs.todo.push_back({uint8_t(m.part_bits + 1), m.part_prefix << 1});
            bs.todo.push_back({uint8_t(m.part_bits + 1), (m.part_prefix << 1) | 1});
        } else {
            bisect_.erase(bit);
            break;
        }
        if (!bs.todo.empty()) {
            open_part_request(from, now, out);
        } else {
            std::vector<TxId> delta = std::move(bs.delta);
            std::vector<gf::u128> asks = std::move(bs.asks);
            bisect_.erase(from);
            std::sort(delta.begin(), delta.end());
            delta.erase(std::unique(delta.begin(), delta.end()), delta.end());
            std::sort(asks.begin(), asks.end());
            asks.erase(std::unique(asks.begin(), asks.end()), asks.end());
            if (!delta.empty() || !asks.empty())
                open_request(from, std::move(delta), std::move(asks), now, out);
        }
        break;
    }
    }
    return out;
}

Block NodeEngine::make_block(uint64_t height, const Hash256& prev_hash, double now)
{
    const Commitment& head = equivocating() ? head_b_ : head_a_;
    Block blk = build_block(pool_, head, height, prev_hash, chain_included_, keys_,
                            params_.block);
    auto resign = [&] { blk.signature = sign_bytes(keys_, blk.signing_bytes()); };
    switch (params_.adversary) {
    case AdversaryKind::Injector: {
        Transaction alien = make_transaction(keys_, 1, {0x5a, uint8_t(height)});
        BlockBundle bb;
        bb.log_index = pool_.bundles().size() + 1000; // a slot never promised
        bb.commit_seq = head.seq;
        bb.tx_ids = {alien.id};
        blk.bundles.push_back(std::move(bb));
        resign();
        break;
    }
    case AdversaryKind::Reorderer: {
        for (BlockBundle& b : blk.bundles) {
            if (b.tx_ids.size() < 2) continue;
            std::reverse(b.tx_ids.begin(), b.tx_ids.end());
            resign();
            break;
        }
        break;
    }
    case AdversaryKind::BlockspaceCensor: {
        // Censors the oldest long-due transactions, but only a bounded
        // slice per block: a difference wider than the sketch capacity
        // would leave inspectors unable to decode (and thus to accuse).
        std::vector<std::pair<double, TxId>> aged;
        for (const BlockBundle& b : blk.bundles)
            for (const TxId& id : b.tx_ids) {
                auto it = content_time_.find(id);
                if (it != content_time_.end() && now - it->second >= 2 * params_.censor_grace)
                    aged.emplace_back(it->second, id);
            }
        std::sort(aged.begin(), aged.end());
        size_t limit = std::min<size_t>(aged.size(), 25);
        std::set<TxId> victims;
        for (size_t i = 0; i < limit; ++i) victims.insert(aged[i].second);
        if (!victims.empty()) {
            for (BlockBundle& b : blk.bundles)
                std::erase_if(b.tx_ids, [&](const TxId& id) { return victims.count(id) != 0; });
            std::erase_if(blk.bundles, [](const BlockBundle& b) { return b.tx_ids.empty(); });
            resign();
        }
        break;
    }
    case AdversaryKind::MempoolCensor:
    case AdversaryKind::ColludingCensor: {
        bool changed = false;
        for (BlockBundle& b : blk.bundles) {
            auto drop = std::remove_if(b.tx_ids.begin(), b.tx_ids.end(), [&](const TxId& id) {
                const Transaction* tx = pool_.content(id);
                return tx && tx->creator == params_.victim;
            });
            if (drop != b.tx_ids.end()) {
                b.tx_ids.erase(drop, b.tx_ids.end());
                changed = true;
            }
        }
        if (changed) {
            std::erase_if(blk.bundles, [](const BlockBundle& b) { return b.tx_ids.empty(); });
            resign();
        }
        break;
    }
    default:
        break;
    }
    return blk;
}

void NodeEngine::adopt_ids(const std::vector<TxId>& ids)
{
    for (const TxId& id : ids) chain_included_.insert(id);
}

size_t NodeEngine::storage_bytes() const
{
    return latest_.size() * commitment_wire_size(params_.block.deploy);
}

} // namespace lo
