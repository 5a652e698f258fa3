#pragma once

#include <lo/commitment.hpp>
#include <lo/mempool.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lo {

/// Canonical order of transactions inside one bundle.
enum class IntraBundleOrder : uint8_t {
    Seeded, // deterministic shuffle keyed by (prev block hash, bundle index)
    Sorted, // ascending TxId; equals Seeded under an identity permutation
};

/// Consensus parameters governing block building and inspection.
struct BlockParams {
    DeployParams deploy;
    IntraBundleOrder ordering = IntraBundleOrder::Seeded;
    uint64_t max_block_txs = 0; // 0 = unlimited blockspace
    int64_t min_fee = 0;
    // Blocks carry transaction ids, not bodies. With require_content off a
    // builder lists every promised id even before its body arrives, so an
    // honest block never looks like an omission to better-connected peers.
    bool require_content = true;
};

/// One bundle as laid out in a block: the builder declares which log
/// bundle the transactions came from, in final intra-bundle order.
struct BlockBundle {
    uint64_t log_index = 0;
    uint64_t commit_seq = 0;
    std::vector<TxId> tx_ids;

    bool operator==(const BlockBundle&) const = default;
};

/// A block carries the creator's current commitment head so inspection
/// needs no side channel to fetch it.
struct Block {
    uint64_t height = 0;
    Hash256 prev_hash{};
    PublicKey creator{};
    Commitment commitment;
    std::vector<BlockBundle> bundles;
    Signature signature{};

    explicit Block(const DeployParams& params) : commitment(params) {}

    Bytes signing_bytes() const;
    Bytes encode() const;
    static Block decode(std::span<const uint8_t> data, const DeployParams& params);
    Hash256 hash() const { return sha256(encode()); }

    std::vector<TxId> all_tx_ids() const;
    size_t tx_total() const;

    bool operator==(const Block&) const = default;
};

/// Shuffle key for one bundle slot: bound to the parent block so the
/// permutation is unpredictable before the parent exists.
Hash256 shuffle_seed(const Hash256& prev_hash, uint64_t log_index);

/// Deterministic permutation: sort ascending, then Fisher-Yates driven by
/// a SHA-256 counter stream over `seed` (4 little-endian 64-bit words per
/// block, rejection-sampled).
std::vector<TxId> canonical_shuffle(std::vector<TxId> ids, const Hash256& seed);

/// Honest block construction over the bundle log: walks bundles in log
/// order, keeps transactions with known valid content that are not
/// already on chain, truncates to blockspace by lowest TxId, and applies
/// the canonical intra-bundle order. Signs with `keys`.
Block build_block(const MempoolLog& pool, const Commitment& head, uint64_t height,
                  const Hash256& prev_hash, const std::set<TxId>& chain_included,
                  const KeyPair& keys, const BlockParams& params);

enum class BlockVerdict : uint8_t {
    Valid,
    Evidence,
    Unresolvable,
};

struct InspectResult {
    BlockVerdict verdict = BlockVerdict::Valid;
    std::optional<ExposureEvidence> evidence;
    std::string note;
};

/// Inspector-side context: what is already on chain, and which
/// transactions the inspector can prove were due for inclusion.
struct InspectContext {
    BlockParams params;
    std::set<TxId> chain_included;
    std::set<TxId> expected_available;
};

/// Checks a block against its embedded commitment. Set-level checks run
/// before order checks: injection, then blockspace censorship, then
/// intra-bundle order. Returns Unresolvable when the sketch difference
/// exceeds capacity or signatures fail upstream validation.
InspectResult inspect_block(const Block& block, const InspectContext& ctx);

/// Re-derives a block-violation verdict from the serialized block plus
/// shared chain context; true when the accusation reproduces.
bool verify_block_evidence(const ExposureEvidence& ev, const InspectContext& ctx);

} // namespace lo
