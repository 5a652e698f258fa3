#pragma once

#include <lo/txmodel.hpp>

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace lo {

/// One promised transaction bundle: the unit of ordering between peers.
struct Bundle {
    uint64_t index = 0;                // position in the log
    std::vector<TxId> tx_ids;          // ascending TxId
    std::optional<PublicKey> source;   // nullopt = locally received
    uint64_t commit_seq = 0;           // the commitment seq that promised it
};

/// Append-only ordered bundle log plus the pending-content pool. Bundles
/// never reorder, shrink, or mutate; known ids only ever grow.
class MempoolLog {
public:
    /// Appends the not-yet-known subset of `ids` as a new bundle (sorted
    /// ascending). Already-known ids are dropped silently; an empty
    /// remainder is a no-op returning nullptr.
    const Bundle* append_bundle(const std::vector<TxId>& ids, std::optional<PublicKey> source,
                                uint64_t commit_seq);

    bool knows(const TxId& id) const { return known_.count(id) != 0; }
    bool has_content(const TxId& id) const { return contents_.count(id) != 0; }

    /// Stores content for a known id. Returns false for ids never
    /// promised by any bundle.
    bool add_content(const Transaction& tx);

    const Transaction* content(const TxId& id) const;

    /// Known ids whose transaction content has not arrived yet.
    std::vector<TxId> missing_content() const;

    const std::vector<Bundle>& bundles() const { return bundles_; }
    const std::set<TxId>& known() const { return known_; }
    size_t tx_count() const { return known_.size(); }

private:
    std::vector<Bundle> bundles_;
    std::set<TxId> known_;
    std::map<TxId, Transaction> contents_;
};

} // namespace lo
