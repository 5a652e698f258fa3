#pragma once

#include <lo/engine.hpp>
#include <lo/rng.hpp>

#include <string>
#include <vector>

namespace lo {

/// Directed gossip graph with bounded out-degree and an inbound cap. The
/// subgraph induced by the first `correct` nodes is strongly connected.
struct Topology {
    std::vector<std::vector<size_t>> out_edges;

    static Topology build(size_t nodes, size_t correct, int out_degree, int in_cap, lo::Rng& rng);
};

/// Pairwise one-way delays in seconds, keyed by city; nodes map onto
/// cities round-robin. Falls back to a uniform band when no table is
/// loaded.
class LatencyModel {
public:
    static LatencyModel uniform(double lo_s, double hi_s);
    static LatencyModel from_csv(const std::string& path);

    /// One-way delay from node a to node b plus fresh jitter.
    double sample(size_t a, size_t b, double jitter_s, lo::Rng& rng) const;

    size_t cities() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::vector<double> base_;   // seconds, cities x cities
    double lo_ = 0.03, hi_ = 0.1;
};

enum class Protocol : uint8_t {
    LO,    // commitment-based reconciliation
    Flood, // periodic full mempool id lists
};

struct SimConfig {
    size_t nodes = 50;
    int out_degree = 8;
    int in_cap = 125;
    double byz_fraction = 0.0;
    AdversaryKind byz_strategy = AdversaryKind::None;
    double tx_rate = 20.0;       // network-wide arrivals per second
    size_t tx_payload = 64;
    double duration_s = 60.0;
    double drain_s = 15.0;       // post-workload settling window
    uint64_t seed = 1;
    Protocol protocol = Protocol::LO;
    bool blocks_enabled = true;
    double block_mean_s = 12.0;
    bool force_adversary_leader = false;
    bool highest_fee_blocks = false; // fee-priority capped baseline builder
    std::string latency_csv;         // empty = uniform latency band
    double latency_jitter = 0.01;
    EngineParams engine;             // per-node template
};

struct SimResult {
    size_t nodes = 0;
    size_t byz_count = 0;
    uint64_t tx_created = 0;
    uint64_t messages = 0;
    uint64_t control_bytes = 0;
    uint64_t blocks = 0;
    uint64_t block_txs = 0;
    uint64_t reconciliations = 0;
    uint64_t bisect_rounds = 0;
    uint64_t decode_failures = 0;
    uint64_t suspicions_raised = 0;
    uint64_t retracts = 0;

    // per measured tx: sync rounds until every honest node had content
    std::vector<double> discovery_rounds;
    uint64_t discovery_incomplete = 0;
    // per measured tx: seconds from creation to on-chain, run end if never
    std::vector<double> inclusion_latency;

    double first_suspicion_time = -1.0;
    double first_exposure_time = -1.0;
    // slowest spread among adversaries exposed at every honest node
    double exposure_propagation_max = -1.0;
    size_t byz_exposed_everywhere = 0;
    size_t byz_detected = 0;          // exposed or suspected at every honest node
    uint64_t honest_exposed = 0;      // false accusations with "proof"
    uint64_t persistent_honest_suspicions = 0;

    size_t max_storage_bytes = 0;
    double mean_storage_bytes = 0.0;
};

SimResult run_simulation(const SimConfig& config);

} // namespace lo
