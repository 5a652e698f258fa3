#include <lo/simnet.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace lo {

Topology Topology::build(size_t nodes, size_t correct, int out_degree, int in_cap, lo::Rng& rng)
{
    if (nodes < 2) throw std::invalid_argument("need at least two nodes");
    int deg = std::min<int>(out_degree, int(nodes) - 1);
    for (int attempt = 0; attempt < 500; ++attempt) {
        Topology topo;
        topo.out_edges.assign(nodes, {});
        std::vector<int> in_deg(nodes, 0);
        bool ok = true;
        for (size_t i = 0; i < nodes && ok; ++i) {
            std::vector<char> used(nodes, 0);
            used[i] = 1;
            for (int k = 0; k < deg; ++k) {
                size_t j = nodes;
                for (int tries = 0; tries < 4000; ++tries) {
                    size_t cand = rng.below(nodes);
                    if (!used[cand] && in_deg[cand] < in_cap) {
                        j = cand;
                        break;
                    }
                }
                if (j == nodes) {
                    ok = false;
                    break;
                }
                used[j] = 1;
                in_deg[j] += 1;
                topo.out_edges[i].push_back(j);
            }
        }
        if (!ok) continue;

        // strong connectivity over the correct prefix, forward and reverse
        auto covered = [&](bool reverse) {
            std::vector<char> seen(correct, 0);
            std::vector<size_t> stack = {0};
            seen[0] = 1;
            size_t count = 1;
            while (!stack.empty()) {
                size_t u = stack.back();
                stack.pop_back();
                if (!reverse) {
                    for (size_t v : topo.out_edges[u])
                        if (v < correct && !seen[v]) {
                            seen[v] = 1;
                            ++count;
                            stack.push_back(v);
                        }
                } else {
                    for (size_t w = 0; w < correct; ++w) {
                        if (seen[w]) continue;
                        for (size_t v : topo.out_edges[w])
                            if (v == u) {
                                seen[w] = 1;
                                ++count;
                                stack.push_back(w);
                                break;
                            }
                    }
                }
            }
            return count == correct;
        };
        if (correct <= 1 || (covered(false) && covered(true))) return topo;
    }
    throw std::runtime_error("could not build a connected topology");
}

LatencyModel LatencyModel::uniform(double lo_s, double hi_s)
{
    LatencyModel m;
    m.lo_ = lo_s;
    m.hi_ = hi_s;
    return m;
}

LatencyModel LatencyModel::from_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open latency table: " + path);
    LatencyModel m;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty latency table");
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ','); // corner label
        while (std::getline(ss, cell, ',')) m.names_.push_back(cell);
    }
    size_t n = m.names_.size();
    m.base_.assign(n * n, 0.0);
    size_t row = 0;
    while (std::getline(in, line) && row < n) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ','); // row city
        for (size_t col = 0; col < n; ++col) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("short latency row");
            m.base_[row * n + col] = std::stod(cell) / 1000.0; // ms on disk
        }
        ++row;
    }
    if (row != n) throw std::runtime_error("latency table is not square");
    return m;
}

double LatencyModel::sample(size_t a, size_t b, double jitter_s, lo::Rng& rng) const
{
    double base;
    if (names_.empty()) {
        base = lo_ + (hi_ - lo_) * rng.uniform();
    } else {
        size_t n = names_.size();
        base = base_[(a % n) * n + (b % n)];
    }
    return std::max(0.001, base + jitter_s * rng.uniform());
}

namespace {

struct TxRecord {
    TxId id{};
    double origin_time = 0;
    int64_t fee = 0;
    std::vector<bool> covered; // per node index
    size_t cover_count = 0;
    double complete_time = -1;
    double included_time = -1;
};

struct Event {
    double t = 0;
    uint64_t seq = 0;
    int type = 0; // 0 tick, 1 deliver, 2 workload, 3 block
    size_t a = 0; // node / origin
    size_t b = 0; // receiver
    Message msg;
};

struct EventOrder {
    bool operator()(const Event& x, const Event& y) const
    {
        return std::tie(x.t, x.seq) > std::tie(y.t, y.seq);
    }
};

Hash256 node_seed(uint64_t run_seed, uint64_t tag, uint64_t i)
{
    Bytes b;
    put_u64le(b, run_seed);
    put_u64le(b, tag);
    put_u64le(b, i);
    return sha256(b);
}

SimResult run_flood(const SimConfig& cfg)
{
    lo::Rng rng(cfg.seed * 2654435761u + 17);
    Topology topo = Topology::build(cfg.nodes, cfg.nodes, cfg.out_degree, cfg.in_cap, rng);
    SimResult res;
    res.nodes = cfg.nodes;

    // Known-id sets as bitsets over the dense tx counter; the baseline
    // only needs set sizes and unions, never the ids themselves.
    std::vector<std::vector<uint64_t>> known(cfg.nodes);
    std::vector<uint64_t> count(cfg.nodes, 0);
    auto mark = [&](size_t n, uint32_t bit) {
        auto& w = known[n];
        size_t word = bit / 64;
        if (w.size() <= word) w.resize(word + 1, 0);
        uint64_t m = uint64_t(1) << (bit % 64);
        if (!(w[word] & m)) {
            w[word] |= m;
            count[n] += 1;
        }
    };
    double next_tx = rng.exponential(1.0 / cfg.tx_rate);
    uint32_t tx_counter = 0;
    const int fanout = cfg.engine.sync_fanout;
    // one sync round per second, same cadence as the reconciling protocol
    for (double tick = 0; tick <= cfg.duration_s; tick += 1.0) {
        while (next_tx <= tick && next_tx <= cfg.duration_s) {
            mark(rng.below(cfg.nodes), tx_counter++);
            res.tx_created += 1;
            next_tx += rng.exponential(1.0 / cfg.tx_rate);
        }
        for (size_t i = 0; i < cfg.nodes; ++i) {
            for (int k = 0; k < fanout; ++k) {
                const auto& out = topo.out_edges[i];
                if (out.empty()) break;
                size_t j = out[rng.below(out.size())];
                res.messages += 1;
                res.control_bytes += 4 + 32 * count[i];
                auto& src = known[i];
                auto& dst = known[j];
                if (dst.size() < src.size()) dst.resize(src.size(), 0);
                for (size_t w = 0; w < src.size(); ++w) {
                    uint64_t fresh = src[w] & ~dst[w];
                    if (fresh) {
                        dst[w] |= fresh;
                        count[j] += uint64_t(std::popcount(fresh));
                    }
                }
            }
        }
    }
    return res;
}

} // namespace

SimResult run_simulation(const SimConfig& cfg)
{
    if (cfg.protocol == Protocol::Flood) return run_flood(cfg);

    lo::Rng rng(cfg.seed * 2654435761u + 3);
    // Workload and block schedules draw from dedicated streams so that
    // protocol variants under one seed face identical arrivals, fees,
    // block times, and leaders.
    lo::Rng wl_rng(cfg.seed * 2654435761u + 101);
    lo::Rng blk_rng(cfg.seed * 2654435761u + 202);
    size_t byz = size_t(std::floor(cfg.byz_fraction * double(cfg.nodes) + 1e-9));
    if (cfg.byz_strategy == AdversaryKind::None) byz = 0;
    size_t honest = cfg.nodes - byz;
    Topology topo = Topology::build(cfg.nodes, honest, cfg.out_degree, cfg.in_cap, rng);
    LatencyModel latency = cfg.latency_csv.empty() ? LatencyModel::uniform(0.03, 0.1)
                                                   : LatencyModel::from_csv(cfg.latency_csv);

    std::vector<KeyPair> node_keys, user_keys;
    for (size_t i = 0; i < cfg.nodes; ++i) {
        node_keys.push_back(derive_keypair(cfg.engine.block.deploy.sig_mode,
                                           node_seed(cfg.seed, 1, i)));
        user_keys.push_back(derive_keypair(cfg.engine.block.deploy.sig_mode,
                                           node_seed(cfg.seed, 2, i)));
    }

    std::vector<NodeEngine> engines;
    engines.reserve(cfg.nodes);
    std::map<PublicKey, size_t> who;
    for (size_t i = 0; i < cfg.nodes; ++i) {
        EngineParams ep = cfg.engine;
        ep.adversary = i < honest ? AdversaryKind::None : cfg.byz_strategy;
        if (cfg.byz_strategy == AdversaryKind::MempoolCensor ||
            cfg.byz_strategy == AdversaryKind::ColludingCensor)
            ep.victim = user_keys[0].pub;
        engines.emplace_back(ep, node_keys[i], cfg.seed * 1000003 + i);
        who[node_keys[i].pub] = i;
    }
    for (size_t i = 0; i < cfg.nodes; ++i) {
        std::vector<PublicKey> nbrs;
        for (size_t j : topo.out_edges[i]) nbrs.push_back(node_keys[j].pub);
        engines[i].set_neighbors(std::move(nbrs));
    }

    SimResult res;
    res.nodes = cfg.nodes;
    res.byz_count = byz;

    std::vector<TxRecord> txreg;
    std::map<TxId, size_t> txindex;

    std::priority_queue<Event, std::vector<Event>, EventOrder> queue;
    uint64_t seq = 0;
    auto push = [&](Event e) {
        e.seq = seq++;
        queue.push(std::move(e));
    };

    const DeployParams& dp = cfg.engine.block.deploy;
    auto dispatch = [&](size_t from, std::vector<Outgoing> out, double now) {
        for (Outgoing& o : out) {
            auto it = who.find(o.to);
            if (it == who.end()) continue;
            res.messages += 1;
            res.control_bytes += o.msg.control_size(dp);
            Event e;
            e.t = now + latency.sample(from, it->second, cfg.latency_jitter, rng);
            e.type = 1;
            e.a = from;
            e.b = it->second;
            e.msg = std::move(o.msg);
            push(std::move(e));
        }
    };

    // staggered one-second sync cadence
    for (size_t i = 0; i < cfg.nodes; ++i)
        push({rng.uniform(), 0, 0, i, 0, {}});
    push({wl_rng.exponential(1.0 / cfg.tx_rate), 0, 2, 0, 0, {}});
    // Block gaps keep the configured mean but get a floor above the flood
    // propagation time, so every leader builds on a tip it has processed.
    const double gap_floor = std::min(1.0, cfg.block_mean_s / 2);
    auto block_gap = [&] {
        return gap_floor + blk_rng.exponential(cfg.block_mean_s - gap_floor);
    };
    if (cfg.blocks_enabled) push({block_gap(), 0, 3, 0, 0, {}});

    uint64_t block_height = 0;
    Hash256 chain_tip = kZeroHash;
    size_t forced_leader_rr = 0;
    const double horizon = cfg.duration_s + cfg.drain_s;

    uint64_t safety = 0;
    while (!queue.empty() && safety++ < 80'000'000) {
        Event ev = queue.top();
        queue.pop();
        double now = ev.t;
        switch (ev.type) {
        case 0: { // tick
            NodeEngine& e = engines[ev.a];
            dispatch(ev.a, e.poll_timeouts(now), now);
            if (now <= cfg.duration_s) dispatch(ev.a, e.sync_tick(now), now);
            if (ev.a < honest && res.first_suspicion_time < 0) {
                for (const auto& [suspect, accusers] : e.suspicions()) {
                    auto it = who.find(suspect);
                    if (it != who.end() && it->second >= honest && !accusers.empty()) {
                        res.first_suspicion_time = now;
                        break;
                    }
                }
            }
            if (now + 1.0 <= horizon) push({now + 1.0, 0, 0, ev.a, 0, {}});
            break;
        }
        case 1: { // deliver
            if (ev.b < honest && !ev.msg.txs.empty()) {
                for (const Transaction& tx : ev.msg.txs) {
                    auto it = txindex.find(tx.id);
                    if (it == txindex.end()) continue;
                    TxRecord& r = txreg[it->second];
                    if (r.covered[ev.b]) continue;
                    r.covered[ev.b] = true;
                    if (++r.cover_count == honest && r.complete_time < 0) r.complete_time = now;
                }
            }
            dispatch(ev.b, engines[ev.b].on_message(node_keys[ev.a].pub, ev.msg, now), now);
            break;
        }
        case 2: { // workload arrival
            size_t origin = wl_rng.below(honest);
            Bytes payload;
            put_u64le(payload, uint64_t(txreg.size())); // keeps every tx id unique
            payload.resize(std::max<size_t>(cfg.tx_payload, 8), 0);
            int64_t fee = 1 + int64_t(100.0 * wl_rng.exponential(1.0));
            Transaction tx = make_transaction(user_keys[origin], fee, std::move(payload));
            TxRecord rec;
            rec.id = tx.id;
            rec.origin_time = now;
            rec.fee = fee;
            rec.covered.assign(cfg.nodes, false);
            rec.covered[origin] = true;
            rec.cover_count = 1;
            if (honest == 1) rec.complete_time = now;
            txindex[tx.id] = txreg.size();
            txreg.push_back(std::move(rec));
            res.tx_created += 1;
            engines[origin].submit_local(tx, now);
            double next = now + wl_rng.exponential(1.0 / cfg.tx_rate);
            if (next <= cfg.duration_s) push({next, 0, 2, 0, 0, {}});
            break;
        }
        case 3: { // block slot
            size_t leader;
            if (cfg.force_adversary_leader && byz > 0)
                leader = honest + (forced_leader_rr++ % byz);
            else
                leader = blk_rng.below(cfg.nodes);
            block_height += 1;
            if (cfg.highest_fee_blocks) {
                // fee-priority baseline: highest fee first, capped blockspace
                NodeEngine& e = engines[leader];
                std::vector<std::pair<int64_t, TxId>> cand;
                for (const TxId& id : e.pool().known()) {
                    if (e.chain_included().count(id)) continue;
                    const Transaction* tx = e.pool().content(id);
                    if (tx) cand.push_back({tx->fee, id});
                }
                std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
                    return x.first != y.first ? x.first > y.first : x.second < y.second;
                });
                size_t cap = cfg.engine.block.max_block_txs
                                 ? cfg.engine.block.max_block_txs
                                 : size_t(cfg.tx_rate * cfg.block_mean_s);
                if (cand.size() > cap) cand.resize(cap);
                std::vector<TxId> ids;
                for (auto& [fee, id] : cand) ids.push_back(id);
                for (NodeEngine& e2 : engines) e2.adopt_ids(ids);
                for (const TxId& id : ids) {
                    auto it = txindex.find(id);
                    if (it != txindex.end() && txreg[it->second].included_time < 0)
                        txreg[it->second].included_time = now;
                }
                res.blocks += 1;
                res.block_txs += ids.size();
            } else if (engines[leader].params().adversary != AdversaryKind::NonResponder) {
                Block blk = engines[leader].make_block(block_height, chain_tip, now);
                chain_tip = blk.hash();
                for (const TxId& id : blk.all_tx_ids()) {
                    auto it = txindex.find(id);
                    if (it != txindex.end() && txreg[it->second].included_time < 0)
                        txreg[it->second].included_time = now;
                }
                res.blocks += 1;
                res.block_txs += blk.tx_total();
                Message ann;
                ann.kind = MsgKind::BlockAnnounce;
                ann.block = std::move(blk);
                dispatch(leader, engines[leader].on_message(node_keys[leader].pub, ann, now),
                         now);
            }
            double next = now + block_gap();
            if (next <= cfg.duration_s) push({next, 0, 3, 0, 0, {}});
            break;
        }
        }
    }

    // aggregate
    for (size_t i = 0; i < honest; ++i) {
        const EngineStats& s = engines[i].stats();
        res.reconciliations += s.reconciliations;
        res.bisect_rounds += s.bisect_rounds;
        res.decode_failures += s.decode_failures;
        res.suspicions_raised += s.suspicions_raised;
        res.retracts += s.retracts;
        res.max_storage_bytes = std::max(res.max_storage_bytes, engines[i].storage_bytes());
        res.mean_storage_bytes += double(engines[i].storage_bytes());
    }
    if (honest > 0) res.mean_storage_bytes /= double(honest);

    const double discovery_margin = 10.0;
    const double inclusion_margin = 2.0 * cfg.block_mean_s;
    for (const TxRecord& r : txreg) {
        if (r.origin_time <= cfg.duration_s - discovery_margin) {
            if (r.complete_time >= 0)
                res.discovery_rounds.push_back(std::ceil(r.complete_time - r.origin_time));
            else {
                res.discovery_rounds.push_back(1e9);
                res.discovery_incomplete += 1;
            }
        }
        if (cfg.blocks_enabled && r.origin_time <= cfg.duration_s - inclusion_margin) {
            double latency_s = r.included_time >= 0 ? r.included_time - r.origin_time
                                                    : horizon - r.origin_time;
            res.inclusion_latency.push_back(latency_s);
        }
    }

    std::set<PublicKey> honest_pks;
    for (size_t i = 0; i < honest; ++i) honest_pks.insert(node_keys[i].pub);
    for (size_t b = honest; b < cfg.nodes; ++b) {
        const PublicKey& bp = node_keys[b].pub;
        double first = -1, last = -1;
        bool everywhere = true, detected = honest > 0;
        for (size_t i = 0; i < honest; ++i) {
            auto it = engines[i].exposed().find(bp);
            bool suspected = engines[i].suspicions().count(bp) != 0;
            if (it != engines[i].exposed().end()) {
                if (first < 0 || it->second < first) first = it->second;
                if (it->second > last) last = it->second;
            } else {
                everywhere = false;
                if (!suspected) detected = false;
            }
        }
        if (first >= 0 && (res.first_exposure_time < 0 || first < res.first_exposure_time))
            res.first_exposure_time = first;
        if (everywhere && honest > 0) {
            res.byz_exposed_everywhere += 1;
            res.exposure_propagation_max = std::max(res.exposure_propagation_max, last - first);
        }
        if (detected) res.byz_detected += 1;
    }
    for (size_t i = 0; i < honest; ++i) {
        for (const auto& [pk, when] : engines[i].exposed())
            if (honest_pks.count(pk)) res.honest_exposed += 1;
        for (const auto& [suspect, accusers] : engines[i].suspicions())
            if (honest_pks.count(suspect)) res.persistent_honest_suspicions += accusers.size();
    }
    return res;
}

} // namespace lo
