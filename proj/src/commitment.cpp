#include <lo/commitment.hpp>

#include <stdexcept>

namespace lo {

void SetChecksum::add(const TxId& id)
{
    Hash256 term = tagged_hash("lo/cs", id.digest);
    unsigned __int128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 sum = carry;
        sum += limbs_[size_t(i)];
        sum += get_u64le(term.data() + 8 * i);
        limbs_[size_t(i)] = uint64_t(sum);
        carry = sum >> 64;
    }
    // carry out of the top limb wraps: arithmetic is mod 2^256
}

Hash256 SetChecksum::digest() const
{
    Hash256 out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 8; ++j) out[size_t(8 * i + j)] = uint8_t(limbs_[size_t(i)] >> (8 * j));
    return out;
}

SetChecksum SetChecksum::from_digest(std::span<const uint8_t> d)
{
    if (d.size() != 32) throw std::invalid_argument("checksum length mismatch");
    SetChecksum cs;
    for (int i = 0; i < 4; ++i) cs.limbs_[size_t(i)] = get_u64le(d.data() + 8 * i);
    return cs;
}

Bytes Commitment::signing_bytes() const
{
    Bytes out;
    out.reserve(wire_size());
    put_bytes(out, author);
    put_u64le(out, seq);
    put_bytes(out, prev_hash);
    put_bytes(out, clock.serialize());
    put_bytes(out, sketch.serialize());
    put_bytes(out, checksum.digest());
    put_u64le(out, tx_count);
    put_u64le(out, bundle_count);
    return out;
}

Bytes Commitment::encode() const
{
    Bytes out = signing_bytes();
    put_bytes(out, signature);
    return out;
}

size_t Commitment::wire_size() const
{
    return 32 + 8 + 32 + clock.wire_size() + sketch.wire_size() + 32 + 8 + 8 + 64;
}

size_t commitment_wire_size(const DeployParams& params)
{
    return 32 + 8 + 32 + (4 + 2 * size_t(params.clock_cells)) +
           size_t(params.sketch_capacity) * size_t(params.field_bits) / 8 + 32 + 8 + 8 + 64;
}

Commitment Commitment::decode(std::span<const uint8_t> data, const DeployParams& params)
{
    if (data.size() != commitment_wire_size(params))
        throw std::invalid_argument("commitment length mismatch");
    Commitment c(params);
    size_t pos = 0;
    std::copy(data.begin(), data.begin() + 32, c.author.begin());
    pos += 32;
    c.seq = get_u64le(data.data() + pos);
    pos += 8;
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 32, c.prev_hash.begin());
    pos += 32;
    size_t clock_bytes = 4 + 2 * size_t(params.clock_cells);
    c.clock = BloomClock::deserialize(data.subspan(pos, clock_bytes), params.clock_seed);
    pos += clock_bytes;
    size_t sketch_bytes = size_t(params.sketch_capacity) * size_t(params.field_bits) / 8;
    c.sketch = Sketch::deserialize(data.subspan(pos, sketch_bytes), params.sketch_capacity,
                                   params.field_bits);
    pos += sketch_bytes;
    c.checksum = SetChecksum::from_digest(data.subspan(pos, 32));
    pos += 32;
    c.tx_count = get_u64le(data.data() + pos);
    pos += 8;
    c.bundle_count = get_u64le(data.data() + pos);
    pos += 8;
    std::copy(data.begin() + long(pos), data.begin() + long(pos) + 64, c.signature.begin());
    return c;
}

Commitment commit_extend(const std::optional<Commitment>& head, const std::vector<TxId>& new_ids,
                         const KeyPair& keys, const DeployParams& params)
{
    Commitment c = head ? *head : Commitment(params);
    if (head) {
        c.seq = head->seq + 1;
        c.prev_hash = head->hash();
    } else {
        c.seq = 0;
        c.prev_hash = kZeroHash;
    }
    c.author = keys.pub;
    for (const TxId& id : new_ids) {
        c.clock.add(id.digest);
        c.sketch.add(params.short_id_of(id));
        c.checksum.add(id);
    }
    c.tx_count += new_ids.size();
    if (!new_ids.empty()) c.bundle_count += 1;
    c.signature = sign_bytes(keys, c.signing_bytes());
    return c;
}

CommitCheck verify_commitment(const Commitment& c, const DeployParams& params)
{
    if (c.clock.cells() != params.clock_cells || c.clock.probes() != params.clock_probes ||
        c.clock.seed() != params.clock_seed || c.sketch.capacity() != params.sketch_capacity ||
        c.sketch.field_bits() != params.field_bits)
        return CommitCheck::BadParams;
    if (!verify_bytes(params.sig_mode, c.author, c.signing_bytes(), c.signature))
        return CommitCheck::BadSignature;
    return CommitCheck::Ok;
}

std::optional<ExposureEvidence> check_chain_consistency(const Commitment& a, const Commitment& b,
                                                        const DeployParams& params)
{
    if (a.author != b.author) throw std::invalid_argument("commitments from different authors");
    const Commitment* lo_c = &a;
    const Commitment* hi_c = &b;
    if (lo_c->seq > hi_c->seq) std::swap(lo_c, hi_c);

    auto evidence = [&](EvidencePredicate pred) {
        ExposureEvidence ev;
        ev.kind = EvidenceKind::Equivocation;
        ev.predicate = pred;
        ev.accused = a.author;
        ev.items = {lo_c->encode(), hi_c->encode()};
        return ev;
    };

    if (lo_c->seq == hi_c->seq) {
        if (lo_c->hash() != hi_c->hash()) return evidence(EvidencePredicate::SameSeqDifferentContent);
        return std::nullopt;
    }
    if (hi_c->seq == lo_c->seq + 1 && hi_c->prev_hash != lo_c->hash())
        return evidence(EvidencePredicate::ForkedParent);
    if (hi_c->tx_count < lo_c->tx_count || hi_c->bundle_count < lo_c->bundle_count)
        return evidence(EvidencePredicate::CounterRegression);
    bool saturated = lo_c->clock.saturated() || hi_c->clock.saturated();
    if (!saturated && !hi_c->clock.consistent_after(lo_c->clock))
        return evidence(EvidencePredicate::ClockRegression);
    // Checksum fall-through for clock collisions: with no growth the set
    // cannot have changed.
    if (hi_c->tx_count == lo_c->tx_count && !(hi_c->checksum == lo_c->checksum))
        return evidence(EvidencePredicate::NoGrowthDivergence);
    (void)params;
    return std::nullopt;
}

bool verify_commitment_evidence(const ExposureEvidence& ev, const DeployParams& params)
{
    if (ev.kind != EvidenceKind::Equivocation || ev.items.size() != 2) return false;
    Commitment a(params), b(params);
    try {
        a = Commitment::decode(ev.items[0], params);
        b = Commitment::decode(ev.items[1], params);
    } catch (const std::exception&) {
        return false;
    }
    if (a.author != ev.accused || b.author != ev.accused) return false;
    if (verify_commitment(a, params) != CommitCheck::Ok) return false;
    if (verify_commitment(b, params) != CommitCheck::Ok) return false;
    try {
        auto found = check_chain_consistency(a, b, params);
        return found.has_value();
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace lo
