#pragma once

#include <lo/blockchain.hpp>
#include <lo/simnet.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lo {

/// Order statistics over a sample; sentinel-free values expected.
struct Summary {
    size_t count = 0;
    double mean = 0;
    double stdev = 0;
    double p50 = 0;
    double p95 = 0;
    double p99 = 0;
    double max = 0;
};

Summary summarize(std::vector<double> values);

/// Fee-priority baseline ordering: descending fee, ties by ascending
/// transaction id, truncated to the blockspace cap (0 = unlimited).
std::vector<TxId> highest_fee_order(std::vector<std::pair<int64_t, TxId>> fees, size_t cap);

const char* adversary_name(AdversaryKind k);
AdversaryKind adversary_from(const std::string& name);
const char* protocol_name(Protocol p);
Protocol protocol_from(const std::string& name);
const char* ordering_name(IntraBundleOrder o);
IntraBundleOrder ordering_from(const std::string& name);

/// Derived per-run metric: control-plane kilobytes per node per minute,
/// transaction payloads excluded by construction of the byte counters.
double control_kb_per_node_min(const SimConfig& cfg, const SimResult& res);

/// Deterministic JSON report for one run: byte-identical for equal
/// (config, seed).
std::string report_json(const SimConfig& cfg, const SimResult& res);

/// Frozen regression vectors, regenerated by the CLI and compared by the
/// tests against the committed copies under data/vectors/.
std::string sketch_vectors_text();
std::string clock_vectors_text();
std::string shuffle_vectors_text();

/// Full acceptance suite: prints one PASS/FAIL line per criterion and a
/// closing tally; returns the number of failed criteria.
int run_acceptance(std::ostream& out);

} // namespace lo
