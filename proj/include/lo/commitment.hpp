#pragma once

#include <lo/bloomclock.hpp>
#include <lo/hash.hpp>
#include <lo/sketch.hpp>
#include <lo/txmodel.hpp>

#include <optional>
#include <vector>

namespace lo {

/// Deployment-wide parameters fixed at genesis. Every commitment in one
/// deployment shares these shapes.
struct DeployParams {
    int sketch_capacity = 100;
    int field_bits = 80;
    uint16_t clock_cells = 32;
    uint8_t clock_probes = 3;
    uint32_t clock_seed = 0;
    Hash256 short_id_salt{};
    SigMode sig_mode = SigMode::Mac;

    BloomClock make_clock() const { return BloomClock(clock_cells, clock_probes, clock_seed); }
    Sketch make_sketch() const { return Sketch(sketch_capacity, field_bits); }
    ShortId short_id_of(const TxId& id) const { return short_id(id, short_id_salt, field_bits); }
};

/// Order-independent 32-byte set digest: sum mod 2^256 of per-element
/// tagged hashes. Additive rather than xor so pairs do not cancel.
class SetChecksum {
public:
    void add(const TxId& id);
    Hash256 digest() const;
    static SetChecksum from_digest(std::span<const uint8_t> d);
    bool operator==(const SetChecksum&) const = default;

private:
    std::array<uint64_t, 4> limbs_{};
};

/// Signed, hash-chained record binding a miner to its grow-only observed
/// transaction set and bundle order.
struct Commitment {
    PublicKey author{};
    uint64_t seq = 0;
    Hash256 prev_hash{};
    BloomClock clock;
    Sketch sketch;
    SetChecksum checksum;
    uint64_t tx_count = 0;
    uint64_t bundle_count = 0;
    Signature signature{};

    explicit Commitment(const DeployParams& params)
        : clock(params.make_clock()), sketch(params.make_sketch()) {}

    Bytes signing_bytes() const;
    Bytes encode() const;
    static Commitment decode(std::span<const uint8_t> data, const DeployParams& params);
    Hash256 hash() const { return sha256(encode()); }
    size_t wire_size() const;

    bool operator==(const Commitment&) const = default;
};

/// Fixed wire size of a commitment at the given deployment shapes.
size_t commitment_wire_size(const DeployParams& params);

/// New chain head: seq 0 on an empty head, otherwise head.seq + 1 with
/// clock/sketch/checksum extended by new_ids. Caller guarantees new_ids
/// are disjoint from the already-committed set.
Commitment commit_extend(const std::optional<Commitment>& head, const std::vector<TxId>& new_ids,
                         const KeyPair& keys, const DeployParams& params);

enum class CommitCheck : uint8_t {
    Ok,
    BadSignature,
    BadParams,
};

CommitCheck verify_commitment(const Commitment& c, const DeployParams& params);

enum class EvidenceKind : uint8_t {
    Equivocation,
    OrderViolation,
    BlockViolation,
};

enum class EvidencePredicate : uint8_t {
    SameSeqDifferentContent,
    ForkedParent,
    CounterRegression,
    ClockRegression,
    NoGrowthDivergence,
    BlockInjection,
    BlockspaceCensorship,
    BlockReordering,
};

/// Verifiable proof of misbehavior: the signed artifacts that contradict
/// each other, plus the machine-checkable predicate they violate.
struct ExposureEvidence {
    EvidenceKind kind = EvidenceKind::Equivocation;
    EvidencePredicate predicate = EvidencePredicate::SameSeqDifferentContent;
    PublicKey accused{};
    std::vector<Bytes> items; // encoded commitments, blocks, transactions
};

/// Consistency of two signed commitments from one author. Returns
/// nullopt when consistent, Equivocation evidence otherwise. Throws on
/// different authors.
std::optional<ExposureEvidence> check_chain_consistency(const Commitment& a, const Commitment& b,
                                                        const DeployParams& params);

/// Re-checks commitment-pair evidence from its serialized items alone.
bool verify_commitment_evidence(const ExposureEvidence& ev, const DeployParams& params);

} // namespace lo
