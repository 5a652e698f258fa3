#pragma once

#include <lo/blockchain.hpp>
#include <lo/commitment.hpp>
#include <lo/mempool.hpp>
#include <lo/rng.hpp>

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace lo {

/// Byzantine behaviors exercised against the protocol.
enum class AdversaryKind : uint8_t {
    None,
    NonResponder,       // drops every inbound request, sends nothing
    Equivocator,        // maintains a second, thinner commitment chain
    Injector,           // slips an uncommitted transaction into its blocks
    Reorderer,          // violates canonical intra-bundle order
    BlockspaceCensor,   // leaves due transactions out of roomy blocks
    MempoolCensor,      // hides a victim's transactions behind a forked chain
    ColludingCensor,    // MempoolCensor variant run by a coordinated group
};

enum class MsgKind : uint8_t {
    CommitRequest,      // requester head + ids it offers + shortids it asks about
    CommitPromise,      // responder extended its chain over the offer
    CommitCurrent,      // nothing fresh promised; responder head + its diff side
    TxBatch,            // transaction contents for promised ids
    SuspicionGossip,
    SuspicionRetract,
    ExposureGossip,
    CommitmentSample,   // relayed third-party head for cross-checking
    BlockAnnounce,
    SketchPartRequest,  // bisection: ask for a shortid-prefix partition
    SketchPartReply,
};

/// One protocol message. A tagged union kept flat: only the fields of the
/// active kind are serialized.
///
/// Reconciliation is responder-driven: the requester sends its head and
/// the responder decodes the sketch difference once, pushing its own side
/// back as ids (tx_ids + txs) and returning the elements it cannot name
/// as ask_shortids for the requester to resolve.
struct Message {
    MsgKind kind = MsgKind::CommitRequest;
    std::optional<Commitment> commitment;
    Hash256 ref{};                  // request hash echoed in replies
    std::vector<TxId> tx_ids;
    std::vector<TxId> want_ids;     // promised ids whose content is missing
    std::vector<gf::u128> ask_shortids; // diff elements the sender cannot name
    bool overflow = false;          // responder's diff exceeded sketch capacity
    std::vector<Transaction> txs;
    PublicKey subject{};            // suspect or sampled author
    PublicKey reporter{};
    std::optional<ExposureEvidence> evidence;
    std::optional<Block> block;
    uint8_t part_bits = 0;
    uint32_t part_prefix = 0;
    std::optional<Sketch> part_sketch;

    Bytes encode(const DeployParams& params) const;
    static Message decode(std::span<const uint8_t> data, const DeployParams& params);

    /// Accounting size: the wire size with transaction payloads replaced
    /// by their 32-byte ids, so protocol overhead is comparable across
    /// dissemination schemes.
    size_t control_size(const DeployParams& params) const;
};

struct Outgoing {
    PublicKey to{};
    Message msg;
};

struct EngineParams {
    BlockParams block;
    double sync_timeout = 1.0;     // seconds before a request is re-sent
    int max_resends = 3;
    double sample_prob = 0.1;      // chance to piggyback a stored head
    double censor_grace = 2.0;     // content age before omission counts
    int sync_fanout = 3;
    int bisect_depth = 10;
    size_t first_contact_cap = 64; // ids offered blind to a new peer
    AdversaryKind adversary = AdversaryKind::None;
    PublicKey victim{};            // censorship target
};

struct EngineStats {
    uint64_t reconciliations = 0;  // promise round trips completed
    uint64_t bisect_rounds = 0;    // partition requests sent
    uint64_t decode_failures = 0;  // whole-set differences past capacity
    uint64_t suspicions_raised = 0;
    uint64_t retracts = 0;
};

/// Per-node protocol state machine. Passive and deterministic: the
/// simulator owns time and delivery, the engine owns protocol decisions.
class NodeEngine {
public:
    NodeEngine(EngineParams params, KeyPair keys, uint64_t rng_seed);

    void set_neighbors(std::vector<PublicKey> out_neighbors);
    const PublicKey& pk() const { return keys_.pub; }
    const EngineParams& params() const { return params_; }

    /// A locally created transaction: promised, stored, and offered to
    /// peers on subsequent sync ticks.
    void submit_local(const Transaction& tx, double now);

    /// Periodic reconciliation: picks random neighbors and opens one
    /// request per peer without an outstanding one.
    std::vector<Outgoing> sync_tick(double now);

    /// Re-sends overdue requests and escalates to suspicion after the
    /// resend budget is spent.
    std::vector<Outgoing> poll_timeouts(double now);

    std::vector<Outgoing> on_message(const PublicKey& from, const Message& m, double now);

    /// Leader duty. Honest construction, then the configured adversary
    /// mutation.
    Block make_block(uint64_t height, const Hash256& prev_hash, double now);

    /// Marks ids as on-chain without a block announcement; used when an
    /// external scheme (a baseline block builder) owns the chain.
    void adopt_ids(const std::vector<TxId>& ids);

    // observable state
    const MempoolLog& pool() const { return pool_; }
    const Commitment& head() const { return head_a_; }
    const std::set<TxId>& chain_included() const { return chain_included_; }
    const std::map<PublicKey, std::set<PublicKey>>& suspicions() const { return suspicions_; }
    const std::map<PublicKey, double>& exposed() const { return exposed_; }
    const std::map<PublicKey, Commitment>& stored() const { return latest_; }
    const EngineStats& stats() const { return stats_; }
    size_t stored_commitments() const { return latest_.size(); }
    size_t missing_count() const { return missing_.size(); }
    size_t open_requests() const { return pending_.size(); }
    size_t open_bisections() const { return bisect_.size(); }
    size_t storage_bytes() const;
    bool knows_content(const TxId& id) const { return pool_.has_content(id); }

private:
    struct Pending {
        Message request;
        Hash256 ref{};
        double sent_at = 0;
        int attempts = 1;
        std::vector<TxId> delta;
    };
    struct Bisect {
        std::vector<std::pair<uint8_t, uint32_t>> todo;
        std::vector<TxId> delta;            // difference elements this side can name
        std::vector<gf::u128> asks;         // elements only the peer can name
    };

    bool equivocating() const;
    bool b_side(const PublicKey& peer) const;
    const Commitment& head_for(const PublicKey& peer) const;
    std::vector<TxId> second_chain_filter(const std::vector<TxId>& ids) const;
    void learn_ids(const std::vector<TxId>& ids, std::optional<PublicKey> source);
    void append_promised(const std::vector<TxId>& ids, std::optional<PublicKey> source);
    void learn_commitment(const PublicKey& author, const Commitment& c, double now,
                          std::vector<Outgoing>& out);
    void accept_exposure(const ExposureEvidence& ev, double now, std::vector<Outgoing>& out);
    void flood(const Message& m, std::vector<Outgoing>& out);
    void open_request(const PublicKey& peer, std::vector<TxId> delta,
                      std::vector<gf::u128> asks, double now, std::vector<Outgoing>& out);
    void open_part_request(const PublicKey& peer, double now, std::vector<Outgoing>& out);
    void maybe_sample(const PublicKey& peer, std::vector<Outgoing>& out);
    std::vector<TxId> want_list() const;
    void serve_batch(const PublicKey& peer, const std::vector<TxId>& first,
                     const std::vector<TxId>& second, std::vector<Outgoing>& out);
    void raise_suspicion(const PublicKey& suspect, double now, std::vector<Outgoing>& out);
    std::set<TxId> due_set(double now) const;
    InspectContext inspect_ctx(double now) const;
    Sketch partition_sketch(uint8_t bits, uint32_t prefix) const;
    void handle_block(const Block& blk, double now, std::vector<Outgoing>& out);

    EngineParams params_;
    KeyPair keys_;
    lo::Rng rng_;
    std::vector<PublicKey> neighbors_;

    MempoolLog pool_;
    Commitment head_a_;
    Commitment head_b_;            // second chain of equivocating adversaries
    Sketch my_sketch_;             // over every promised shortid
    std::map<gf::u128, TxId> index_;
    std::map<TxId, double> content_time_;
    std::set<TxId> missing_; // promised ids still waiting for content

    std::map<PublicKey, Commitment> latest_;
    std::map<PublicKey, Pending> pending_;
    std::map<PublicKey, Bisect> bisect_;

    std::map<PublicKey, std::set<PublicKey>> suspicions_;
    std::set<std::pair<PublicKey, PublicKey>> retracts_seen_;
    std::map<PublicKey, double> exposed_;
    std::set<Hash256> seen_blocks_;
    std::set<TxId> chain_included_;

    EngineStats stats_;
};

} // namespace lo
