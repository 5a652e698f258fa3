#include <lo/harness.hpp>

#include <lo/engine.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace lo {

using ordered_json = nlohmann::ordered_json;

Summary summarize(std::vector<double> values)
{
    Summary s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    s.count = values.size();
    double sum = 0;
    for (double v : values) sum += v;
    s.mean = sum / double(values.size());
    double var = 0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stdev = values.size() > 1 ? std::sqrt(var / double(values.size() - 1)) : 0.0;
    auto at = [&](double q) {
        size_t i = size_t(q * double(values.size() - 1) + 0.5);
        return values[std::min(i, values.size() - 1)];
    };
    s.p50 = at(0.50);
    s.p95 = at(0.95);
    s.p99 = at(0.99);
    s.max = values.back();
    return s;
}

std::vector<TxId> highest_fee_order(std::vector<std::pair<int64_t, TxId>> fees, size_t cap)
{
    std::sort(fees.begin(), fees.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (cap && fees.size() > cap) fees.resize(cap);
    std::vector<TxId> out;
    out.reserve(fees.size());
    for (auto& [fee, id] : fees) out.push_back(id);
    return out;
}

const char* adversary_name(AdversaryKind k)
{
    switch (k) {
    case AdversaryKind::None: return "none";
    case AdversaryKind::NonResponder: return "non-responder";
    case AdversaryKind::Equivocator: return "equivocator";
    case AdversaryKind::Injector: return "injector";
    case AdversaryKind::Reorderer: return "reorderer";
    case AdversaryKind::BlockspaceCensor: return "blockspace-censor";
    case AdversaryKind::MempoolCensor: return "mempool-censor";
    case AdversaryKind::ColludingCensor: return "colluding-censor";
    }
    return "unknown";
}

AdversaryKind adversary_from(const std::string& name)
{
    for (AdversaryKind k :
         {AdversaryKind::None, AdversaryKind::NonResponder, AdversaryKind::Equivocator,
          AdversaryKind::Injector, AdversaryKind::Reorderer, AdversaryKind::BlockspaceCensor,
          AdversaryKind::MempoolCensor, AdversaryKind::ColludingCensor})
        if (name == adversary_name(k)) return k;
    throw std::invalid_argument("unknown adversary strategy: " + name);
}

const char* protocol_name(Protocol p)
{
    return p == Protocol::Flood ? "flood" : "lo";
}

Protocol protocol_from(const std::string& name)
{
    if (name == "lo") return Protocol::LO;
    if (name == "flood") return Protocol::Flood;
    throw std::invalid_argument("unknown protocol: " + name);
}

const char* ordering_name(IntraBundleOrder o)
{
    return o == IntraBundleOrder::Sorted ? "sorted" : "seeded";
}

IntraBundleOrder ordering_from(const std::string& name)
{
    if (name == "seeded") return IntraBundleOrder::Seeded;
    if (name == "sorted") return IntraBundleOrder::Sorted;
    throw std::invalid_argument("unknown ordering: " + name);
}

double control_kb_per_node_min(const SimConfig& cfg, const SimResult& res)
{
    double minutes = cfg.duration_s / 60.0;
    if (minutes <= 0 || res.nodes == 0) return 0;
    return double(res.control_bytes) / 1024.0 / double(res.nodes) / minutes;
}

namespace {

constexpr double kDiscoverySentinel = 1e9;

/// Discovery values with incomplete sentinels removed, plus the fraction
/// of measured transactions reaching every honest node within 8 rounds.
std::pair<Summary, double> discovery_stats(const SimResult& res)
{
    std::vector<double> done;
    size_t fast = 0;
    for (double d : res.discovery_rounds) {
        if (d < kDiscoverySentinel) done.push_back(d);
        if (d <= 8.0) ++fast;
    }
    double fast_fraction =
        res.discovery_rounds.empty() ? 1.0 : double(fast) / double(res.discovery_rounds.size());
    return {summarize(std::move(done)), fast_fraction};
}

} // namespace

std::string report_json(const SimConfig& cfg, const SimResult& res)
{
    ordered_json j;
    j["config"] = {{"nodes", cfg.nodes},
                   {"out_degree", cfg.out_degree},
                   {"in_cap", cfg.in_cap},
                   {"byz_fraction", cfg.byz_fraction},
                   {"byz_strategy", adversary_name(cfg.byz_strategy)},
                   {"tx_rate", cfg.tx_rate},
                   {"tx_payload", cfg.tx_payload},
                   {"duration_s", cfg.duration_s},
                   {"drain_s", cfg.drain_s},
                   {"seed", cfg.seed},
                   {"protocol", protocol_name(cfg.protocol)},
                   {"blocks_enabled", cfg.blocks_enabled},
                   {"block_mean_s", cfg.block_mean_s},
                   {"force_adversary_leader", cfg.force_adversary_leader},
                   {"highest_fee_blocks", cfg.highest_fee_blocks},
                   {"latency_csv", cfg.latency_csv},
                   {"latency_jitter", cfg.latency_jitter},
                   {"ordering", ordering_name(cfg.engine.block.ordering)},
                   {"sketch_capacity", cfg.engine.block.deploy.sketch_capacity},
                   {"field_bits", cfg.engine.block.deploy.field_bits}};
    j["totals"] = {{"tx_created", res.tx_created},
                   {"messages", res.messages},
                   {"control_bytes", res.control_bytes},
                   {"blocks", res.blocks},
                   {"block_txs", res.block_txs},
                   {"reconciliations", res.reconciliations},
                   {"bisect_rounds", res.bisect_rounds},
                   {"decode_failures", res.decode_failures},
                   {"suspicions_raised", res.suspicions_raised},
                   {"retracts", res.retracts}};
    j["bandwidth"] = {{"control_kb_per_node_min", control_kb_per_node_min(cfg, res)}};
    auto [disc, fast8] = discovery_stats(res);
    j["discovery"] = {{"measured", res.discovery_rounds.size()},
                      {"incomplete", res.discovery_incomplete},
                      {"mean_rounds", disc.mean},
                      {"p50_rounds", disc.p50},
                      {"p95_rounds", disc.p95},
                      {"p99_rounds", disc.p99},
                      {"max_rounds", disc.max},
                      {"within8_fraction", fast8}};
    Summary inc = summarize(res.inclusion_latency);
    j["inclusion"] = {{"measured", inc.count},
                      {"mean_s", inc.mean},
                      {"p50_s", inc.p50},
                      {"p95_s", inc.p95},
                      {"max_s", inc.max}};
    j["blame"] = {{"byz_count", res.byz_count},
                  {"first_suspicion_time", res.first_suspicion_time},
                  {"first_exposure_time", res.first_exposure_time},
                  {"exposure_propagation_max", res.exposure_propagation_max},
                  {"byz_exposed_everywhere", res.byz_exposed_everywhere},
                  {"byz_detected", res.byz_detected},
                  {"honest_exposed", res.honest_exposed},
                  {"persistent_honest_suspicions", res.persistent_honest_suspicions}};
    j["storage"] = {{"max_bytes", res.max_storage_bytes},
                    {"mean_bytes", res.mean_storage_bytes},
                    {"commitment_wire_bytes", commitment_wire_size(cfg.engine.block.deploy)}};
    return j.dump(2) + "\n";
}

// --------------------------------------------------------------------------
// frozen regression vectors

namespace {

Hash256 seed_hash(uint64_t n)
{
    Bytes b;
    put_u64le(b, n);
    return sha256(b);
}

} // namespace

std::string sketch_vectors_text()
{
    std::ostringstream out;
    out << "# sketch serialization vectors: field_bits capacity elements... -> hex\n";
    for (int bits : {32, 64, 80}) {
        Sketch s(8, bits);
        std::vector<gf::u128> elems;
        for (uint64_t i = 1; i <= 5; ++i) {
            Hash256 h = seed_hash(0x5e00 + i);
            gf::u128 e = 0;
            for (int k = 0; k < bits / 8; ++k) e = (e << 8) | h[size_t(k)];
            if (e == 0) e = 1;
            elems.push_back(e);
            s.add(e);
        }
        out << "sketch b=" << bits << " c=8 elems=";
        for (size_t i = 0; i < elems.size(); ++i) {
            Bytes eb;
            for (int k = bits / 8 - 1; k >= 0; --k) eb.push_back(uint8_t(elems[i] >> (8 * k)));
            out << (i ? "," : "") << to_hex(eb);
        }
        out << " wire=" << to_hex(s.serialize()) << "\n";
    }
    return out.str();
}

std::string clock_vectors_text()
{
    std::ostringstream out;
    out << "# bloom clock serialization vectors: cells probes seed ids... -> hex\n";
    for (uint32_t seed : {0u, 7u}) {
        BloomClock c(32, 3, seed);
        out << "clock m=32 k=3 seed=" << seed << " ids=";
        for (uint64_t i = 1; i <= 6; ++i) {
            Hash256 h = seed_hash(0xc10c + i);
            c.add(h);
            out << (i > 1 ? "," : "") << to_hex(h).substr(0, 8);
        }
        out << " wire=" << to_hex(c.serialize()) << "\n";
    }
    return out.str();
}

std::string shuffle_vectors_text()
{
    std::ostringstream out;
    out << "# canonical shuffle vectors: ids (any input order) + seed -> output order\n";
    std::vector<TxId> ids;
    for (uint64_t i = 1; i <= 5; ++i) ids.push_back(TxId{seed_hash(0x05f0 + i)});
    for (uint64_t sv : {1ull, 42ull}) {
        Hash256 seed = seed_hash(0x5eed0ULL + sv);
        std::vector<TxId> shuffled = canonical_shuffle(ids, seed);
        out << "shuffle seed=" << to_hex(seed).substr(0, 16) << " in=";
        for (size_t i = 0; i < ids.size(); ++i)
            out << (i ? "," : "") << to_hex(ids[i].digest).substr(0, 8);
        out << " out=";
        for (size_t i = 0; i < shuffled.size(); ++i)
            out << (i ? "," : "") << to_hex(shuffled[i].digest).substr(0, 8);
        out << "\n";
    }
    return out.str();
}

// --------------------------------------------------------------------------
// acceptance suite

namespace {

double now_s()
{
    using clk = std::chrono::steady_clock;
    return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

struct Criterion {
    std::ostream& out;
    int failures = 0;

    void report(int id, const std::string& name, bool pass, const std::string& detail)
    {
        out << "C" << id << " " << name << " " << (pass ? "PASS" : "FAIL") << " (" << detail
            << ")" << std::endl;
        if (!pass) failures += 1;
    }
};

SimConfig acceptance_config(size_t nodes, double duration_s, uint64_t seed)
{
    SimConfig cfg;
    cfg.nodes = nodes;
    cfg.out_degree = 8;
    cfg.tx_rate = 20.0;
    cfg.duration_s = duration_s;
    cfg.drain_s = 15.0;
    cfg.seed = seed;
    cfg.engine.block.require_content = false;
    cfg.engine.censor_grace = 4.0;
    return cfg;
}

// C1: decode(merge(sketch(A), sketch(B))) must equal the brute-force
// symmetric difference exactly, across small and paper-sized capacities.
void run_c1(Criterion& cr)
{
    const double t0 = now_s();
    lo::Rng rng(0xacce97a11ce);
    size_t pairs = 0, mismatches = 0;
    for (auto [cap, trials] : {std::pair<int, int>{8, 8800}, {100, 1200}}) {
        for (int t = 0; t < trials; ++t) {
            size_t d = rng.below(uint64_t(cap) + 1);
            size_t shared = rng.below(16);
            std::set<gf::u128> a, b;
            auto fresh = [&] {
                while (true) {
                    gf::u128 e = (gf::u128(rng.next()) << 16) ^ rng.next();
                    e &= (gf::u128(1) << 80) - 1;
                    if (e == 0) e = 1;
                    if (!a.count(e) && !b.count(e)) return e;
                }
            };
            for (size_t i = 0; i < shared; ++i) {
                gf::u128 e = fresh();
                a.insert(e);
                b.insert(e);
            }
            size_t only_a = rng.below(d + 1);
            for (size_t i = 0; i < only_a; ++i) a.insert(fresh());
            for (size_t i = 0; i < d - only_a; ++i) b.insert(fresh());

            Sketch sa(cap, 80), sb(cap, 80);
            for (gf::u128 e : a) sa.add(e);
            for (gf::u128 e : b) sb.add(e);
            sa.merge(sb);
            auto decoded = sa.decode();

            std::vector<gf::u128> want;
            std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                          std::back_inserter(want));
            pairs += 1;
            if (!decoded || *decoded != want) mismatches += 1;
        }
    }
    double dt = now_s() - t0;
    std::ostringstream d;
    d << pairs << " pairs at c in {8,100}, " << mismatches << " mismatches, " << int(dt)
      << "s (limit 60s)";
    cr.report(1, "sketch-oracle-equivalence", mismatches == 0 && pairs >= 10000 && dt < 60.0,
              d.str());
}

void run_c2(Criterion& cr)
{
    size_t clock_bytes = BloomClock(32, 3, 0).serialize().size();
    size_t sketch_bytes = Sketch(100, 80).serialize().size();
    std::ostringstream d;
    d << "clock=" << clock_bytes << "B (want 68), sketch=" << sketch_bytes << "B (want 1000)";
    cr.report(2, "wire-size-exactness", clock_bytes == 68 && sketch_bytes == 1000, d.str());
}

// C9 helper: a tiny instant-delivery switchboard over engines.
struct Script {
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
};

void run_c9(Criterion& cr)
{
    EngineParams p;
    p.block.ordering = IntraBundleOrder::Sorted; // identity-permutation fixture
    p.censor_grace = 1000.0;

    auto keys_at = [&](uint64_t n) { return derive_keypair(SigMode::Mac, seed_hash(900 + n)); };
    NodeEngine a(p, keys_at(1), 1), b(p, keys_at(2), 2), c(p, keys_at(3), 3), d(p, keys_at(4), 4);
    a.set_neighbors({b.pk()});
    c.set_neighbors({b.pk()});
    d.set_neighbors({b.pk()});
    b.set_neighbors({});

    // six transactions labeled 1..6 by ascending id
    KeyPair user = derive_keypair(SigMode::Mac, seed_hash(999));
    std::vector<Transaction> txs;
    for (uint8_t i = 0; i < 6; ++i) txs.push_back(make_transaction(user, 5, {uint8_t(0x60 + i)}));
    std::sort(txs.begin(), txs.end(),
              [](const Transaction& x, const Transaction& y) { return x.id < y.id; });
    auto label = [&](const TxId& id) {
        for (size_t i = 0; i < txs.size(); ++i)
            if (txs[i].id == id) return int(i + 1);
        return 0;
    };

    Script net;
    net.add(a);
    net.add(b);
    net.add(c);
    net.add(d);

    // D seeds B's own bundle {1,3,4}; then A offers {2}; then C offers {5,6}
    for (int i : {1, 3, 4}) d.submit_local(txs[size_t(i - 1)], 0.0);
    a.submit_local(txs[1], 0.0);
    for (int i : {5, 6}) c.submit_local(txs[size_t(i - 1)], 0.0);
    net.post(d.pk(), d.sync_tick(0.0));
    net.pump(0.0);
    net.post(a.pk(), a.sync_tick(1.0));
    net.pump(1.0);
    net.post(c.pk(), c.sync_tick(2.0));
    net.pump(2.0);

    Block blk = b.make_block(1, kZeroHash, 3.0);
    std::vector<int> order;
    for (const TxId& id : blk.all_tx_ids()) order.push_back(label(id));
    std::vector<int> want{1, 3, 4, 2, 5, 6};
    std::ostringstream det;
    det << "block order";
    for (int v : order) det << " " << v;
    det << ", want 1 3 4 2 5 6";
    cr.report(9, "scripted-reconciliation-block-order", order == want, det.str());
}

void run_c10(Criterion& cr)
{
    lo::Rng rng(0x10b10c);
    BlockParams params;
    params.ordering = IntraBundleOrder::Seeded;
    const DeployParams& dp = params.deploy;
    size_t logs = 0, bad_valid = 0, bad_inject = 0, bad_omit = 0, bad_swap = 0;

    for (int iter = 0; iter < 1000; ++iter) {
        KeyPair miner = derive_keypair(SigMode::Mac, seed_hash(0x4000 + uint64_t(iter)));
        KeyPair user = derive_keypair(SigMode::Mac, seed_hash(0x8000 + uint64_t(iter)));
        MempoolLog pool;
        std::optional<Commitment> head;
        size_t bundles = 2 + rng.below(4);
        for (size_t bi = 0; bi < bundles; ++bi) {
            size_t n = 2 + rng.below(4); // >= 2 so transpositions always exist
            std::vector<TxId> ids;
            std::vector<Transaction> bundle_txs;
            for (size_t t = 0; t < n; ++t) {
                Bytes payload;
                put_u64le(payload, rng.next());
                Transaction tx =
                    make_transaction(user, int64_t(1 + rng.below(50)), std::move(payload));
                ids.push_back(tx.id);
                bundle_txs.push_back(std::move(tx));
            }
            uint64_t next_seq = head ? head->seq + 1 : 0;
            pool.append_bundle(ids, std::nullopt, next_seq);
            for (const Transaction& tx : bundle_txs) pool.add_content(tx);
            head = commit_extend(head, ids, miner, dp);
        }
        Hash256 prev = seed_hash(0xb10c + uint64_t(iter));
        Block blk = build_block(pool, *head, 1, prev, {}, miner, params);

        InspectContext ctx;
        ctx.params = params;
        for (const TxId& id : pool.known()) ctx.expected_available.insert(id);

        logs += 1;
        if (inspect_block(blk, ctx).verdict != BlockVerdict::Valid) {
            bad_valid += 1;
            continue;
        }
        auto resign = [&](Block& bl) { bl.signature = sign_bytes(miner, bl.signing_bytes()); };

        Block inj = blk;
        Transaction alien = make_transaction(user, 1, {0xaa, uint8_t(iter)});
        BlockBundle bb;
        bb.log_index = pool.bundles().size() + 7;
        bb.commit_seq = head->seq;
        bb.tx_ids = {alien.id};
        inj.bundles.push_back(std::move(bb));
        resign(inj);
        InspectResult r = inspect_block(inj, ctx);
        if (r.verdict != BlockVerdict::Evidence || !r.evidence ||
            r.evidence->predicate != EvidencePredicate::BlockInjection)
            bad_inject += 1;

        Block omit = blk;
        size_t which = rng.below(omit.bundles.size());
        omit.bundles[which].tx_ids.pop_back();
        if (omit.bundles[which].tx_ids.empty())
            omit.bundles.erase(omit.bundles.begin() + long(which));
        resign(omit);
        r = inspect_block(omit, ctx);
        if (r.verdict != BlockVerdict::Evidence || !r.evidence ||
            r.evidence->predicate != EvidencePredicate::BlockspaceCensorship)
            bad_omit += 1;

        Block swap = blk;
        BlockBundle& sb = swap.bundles[rng.below(swap.bundles.size())];
        std::swap(sb.tx_ids[0], sb.tx_ids[1]);
        resign(swap);
        r = inspect_block(swap, ctx);
        if (r.verdict != BlockVerdict::Evidence || !r.evidence ||
            r.evidence->predicate != EvidencePredicate::BlockReordering)
            bad_swap += 1;
    }
    std::ostringstream d;
    d << logs << " logs; invalid-honest=" << bad_valid << " missed-injection=" << bad_inject
      << " missed-omission=" << bad_omit << " missed-transposition=" << bad_swap;
    cr.report(10, "inspection-roundtrip-and-mutation",
              bad_valid + bad_inject + bad_omit + bad_swap == 0, d.str());
}

} // namespace

int run_acceptance(std::ostream& out)
{
    Criterion cr{out};
    const double suite_t0 = now_s();

    run_c1(cr);
    run_c2(cr);

    // C3: accountability accuracy over 50 all-honest runs at spec scale.
    // C7 and C12 reuse these runs.
    std::vector<double> all_discovery;
    size_t c3_violations = 0;
    size_t c3_max_storage = 0;
    double worst_fast8 = 1.0;
    {
        for (uint64_t seed = 1; seed <= 50; ++seed) {
            SimConfig cfg = acceptance_config(200, 120.0, seed);
            SimResult res = run_simulation(cfg);
            if (res.honest_exposed != 0 || res.persistent_honest_suspicions != 0)
                c3_violations += 1;
            all_discovery.insert(all_discovery.end(), res.discovery_rounds.begin(),
                                 res.discovery_rounds.end());
            auto [disc, fast8] = discovery_stats(res);
            (void)disc;
            worst_fast8 = std::min(worst_fast8, fast8);
            c3_max_storage = std::max(c3_max_storage, res.max_storage_bytes);
        }
        std::ostringstream d;
        d << "50 runs x 200 nodes x 20 tx/s x 120s: " << c3_violations
          << " runs with false exposures or persistent suspicions";
        cr.report(3, "accountability-accuracy", c3_violations == 0, d.str());
    }

    // C4: detection completeness per adversary strategy, 10 seeds each.
    {
        struct Strat {
            AdversaryKind kind;
            bool needs_blocks;
        };
        std::vector<Strat> strategies{{AdversaryKind::Equivocator, true},
                                      {AdversaryKind::Injector, true},
                                      {AdversaryKind::Reorderer, true},
                                      {AdversaryKind::BlockspaceCensor, true},
                                      {AdversaryKind::MempoolCensor, true},
                                      {AdversaryKind::NonResponder, false}};
        size_t failed_runs = 0;
        std::ostringstream d;
        for (const Strat& st : strategies) {
            size_t ok = 0;
            for (uint64_t seed = 1; seed <= 10; ++seed) {
                SimConfig cfg = acceptance_config(200, 60.0, 1000 + seed);
                cfg.byz_fraction = 0.01; // two adversaries
                cfg.byz_strategy = st.kind;
                cfg.force_adversary_leader = st.needs_blocks;
                SimResult res = run_simulation(cfg);
                bool pass = st.kind == AdversaryKind::NonResponder
                                ? res.byz_detected == res.byz_count
                                : res.byz_exposed_everywhere == res.byz_count;
                if (pass)
                    ok += 1;
                else
                    failed_runs += 1;
            }
            d << adversary_name(st.kind) << "=" << ok << "/10 ";
        }
        cr.report(4, "detection-completeness", failed_runs == 0, d.str());
    }

    // C5: exposure propagation bound across byzantine fractions.
    {
        bool pass = true;
        std::ostringstream d;
        d << "curve(frac:prop_s)";
        for (double frac : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            SimConfig cfg = acceptance_config(100, 45.0, 500 + uint64_t(frac * 10));
            cfg.byz_fraction = frac;
            cfg.byz_strategy = AdversaryKind::ColludingCensor;
            cfg.force_adversary_leader = true;
            SimResult res = run_simulation(cfg);
            double prop = res.exposure_propagation_max;
            d << " " << frac << ":" << (prop < 0 ? -1.0 : prop);
            if (res.byz_exposed_everywhere == 0 || prop < 0 || prop > 10.0) pass = false;
        }
        d << " (bound 10s)";
        cr.report(5, "exposure-propagation", pass, d.str());
    }

    // C6: control bandwidth vs the flooding baseline on identical seeds.
    {
        SimConfig cfg = acceptance_config(200, 600.0, 77);
        SimResult lo_res = run_simulation(cfg);
        cfg.protocol = Protocol::Flood;
        SimResult fl_res = run_simulation(cfg);
        double ratio = fl_res.control_bytes
                           ? double(lo_res.control_bytes) / double(fl_res.control_bytes)
                           : 1e9;
        std::ostringstream d;
        d << "lo=" << lo_res.control_bytes / 1000000 << "MB flood="
          << fl_res.control_bytes / 1000000 << "MB ratio=" << ratio << " (limit 0.25)";
        cr.report(6, "bandwidth-vs-flood", ratio <= 0.25, d.str());
    }

    // C7: discovery-round distribution at 200 nodes (reusing C3 runs) and
    // at the kilo-node end of the range.
    {
        SimConfig cfg = acceptance_config(1000, 45.0, 99);
        SimResult res = run_simulation(cfg);
        auto [disc_k, fast8_k] = discovery_stats(res);
        size_t fast = 0;
        for (double v : all_discovery)
            if (v <= 8.0) ++fast;
        double frac200 =
            all_discovery.empty() ? 0.0 : double(fast) / double(all_discovery.size());
        std::ostringstream d;
        d << "200n within-8 fraction=" << frac200 << " (worst run " << worst_fast8
          << "), 1000n fraction=" << fast8_k << " mean=" << disc_k.mean
          << " rounds (need >=0.99)";
        cr.report(7, "discovery-hop-shape", frac200 >= 0.99 && fast8_k >= 0.99, d.str());
    }

    // C8: inclusion latency, natural bundle order vs fee-priority blocks.
    {
        bool pass = true;
        double nat_mean = 0, hf_mean = 0, nat_p95 = 0, hf_p95 = 0;
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            SimConfig cfg = acceptance_config(50, 120.0, 300 + seed);
            SimResult nat = run_simulation(cfg);
            cfg.highest_fee_blocks = true;
            SimResult hf = run_simulation(cfg);
            Summary sn = summarize(nat.inclusion_latency);
            Summary sh = summarize(hf.inclusion_latency);
            nat_mean += sn.mean / 10;
            hf_mean += sh.mean / 10;
            nat_p95 += sn.p95 / 10;
            hf_p95 += sh.p95 / 10;
            if (!(sn.mean < sh.mean && sn.p95 < sh.p95)) pass = false;
        }
        std::ostringstream d;
        d << "mean " << nat_mean << "s vs " << hf_mean << "s, p95 " << nat_p95 << "s vs "
          << hf_p95 << "s over 10 seeds (natural must be strictly lower per seed)";
        cr.report(8, "ordering-fairness", pass, d.str());
    }

    run_c9(cr);
    run_c10(cr);

    // C11: byte-identical reports for equal (config, seed).
    {
        SimConfig cfg = acceptance_config(30, 30.0, 5);
        std::string r1 = report_json(cfg, run_simulation(cfg));
        std::string r2 = report_json(cfg, run_simulation(cfg));
        std::ostringstream d;
        d << "two 30-node runs, reports " << (r1 == r2 ? "identical" : "differ") << " ("
          << r1.size() << "B)";
        cr.report(11, "report-determinism", r1 == r2, d.str());
    }

    // C12: storage accounting against the analytic commitment size.
    {
        DeployParams dp;
        size_t wire = commitment_wire_size(dp);
        size_t analytic200 = 199 * wire; // one stored head per peer
        size_t analytic10k = 10000 * wire;
        bool within = c3_max_storage <= 2 * analytic200;
        bool paper_scale = analytic10k <= size_t(87) * 1000 * 1000;
        std::ostringstream d;
        d << "measured max " << c3_max_storage << "B vs analytic " << analytic200
          << "B at 200 nodes (limit 2x); 10k-node analytic " << analytic10k
          << "B <= 87MB: " << (paper_scale ? "yes" : "no");
        cr.report(12, "storage-accounting", within && paper_scale, d.str());
    }

    out << (cr.failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " ("
        << (12 - cr.failures) << "/12 criteria, " << int(now_s() - suite_t0) << "s)"
        << std::endl;
    return cr.failures;
}

} // namespace lo
