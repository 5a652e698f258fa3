#include <lo/mempool.hpp>

#include <algorithm>

namespace lo {

const Bundle* MempoolLog::append_bundle(const std::vector<TxId>& ids,
                                        std::optional<PublicKey> source, uint64_t commit_seq)
{
    std::vector<TxId> fresh;
    fresh.reserve(ids.size());
    for (const TxId& id : ids)
        if (!known_.count(id)) fresh.push_back(id);
    std::sort(fresh.begin(), fresh.end());
    fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
    if (fresh.empty()) return nullptr;

    Bundle b;
    b.index = bundles_.size();
    b.tx_ids = std::move(fresh);
    b.source = std::move(source);
    b.commit_seq = commit_seq;
    known_.insert(b.tx_ids.begin(), b.tx_ids.end());
    bundles_.push_back(std::move(b));
    return &bundles_.back();
}

bool MempoolLog::add_content(const Transaction& tx)
{
    if (!known_.count(tx.id)) return false;
    contents_.emplace(tx.id, tx);
    return true;
}

const Transaction* MempoolLog::content(const TxId& id) const
{
    auto it = contents_.find(id);
    return it == contents_.end() ? nullptr : &it->second;
}

std::vector<TxId> MempoolLog::missing_content() const
{
    std::vector<TxId> out;
    for (const TxId& id : known_)
        if (!contents_.count(id)) out.push_back(id);
    return out;
}

} // namespace lo
