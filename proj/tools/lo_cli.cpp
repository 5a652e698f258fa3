// Command-line harness: single runs, parameter sweeps, baseline
// comparisons, regression-vector generation, and the acceptance suite.

#include <lo/harness.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace lo;

namespace {

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    std::cout << "wrote " << path.string() << "\n";
}

void write_run_outputs(const fs::path& dir, const SimConfig& cfg, const SimResult& res)
{
    fs::create_directories(dir);
    write_file(dir / "report.json", report_json(cfg, res));

    std::ostringstream hist;
    hist << "rounds,txs\n";
    std::map<int, size_t> buckets;
    for (double d : res.discovery_rounds)
        buckets[d < 1e9 ? int(d) : -1] += 1;
    for (auto [rounds, n] : buckets) hist << rounds << "," << n << "\n";
    write_file(dir / "discovery_hist.csv", hist.str());

    std::vector<double> lat = res.inclusion_latency;
    std::sort(lat.begin(), lat.end());
    std::ostringstream cdf;
    cdf << "latency_s,fraction\n";
    for (size_t i = 0; i < lat.size(); ++i)
        if (i + 1 == lat.size() || lat[i + 1] != lat[i])
            cdf << lat[i] << "," << double(i + 1) / double(lat.size()) << "\n";
    write_file(dir / "inclusion_cdf.csv", cdf.str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"accountable mempool simulation harness"};
    app.require_subcommand(1);

    SimConfig cfg;
    std::string strategy = "none", protocol = "lo", ordering = "seeded", out_dir = "out";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--nodes", cfg.nodes, "network size");
        sub->add_option("--seed", cfg.seed, "simulation seed");
        sub->add_option("--duration-s", cfg.duration_s, "workload duration in seconds");
        sub->add_option("--tx-rate", cfg.tx_rate, "network-wide transactions per second");
        sub->add_option("--out-degree", cfg.out_degree, "gossip out-degree");
        sub->add_option("--block-mean-s", cfg.block_mean_s, "mean block interval");
        sub->add_option("--latency-csv", cfg.latency_csv, "city latency table (empty = uniform)");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* run = app.add_subcommand("run", "one simulation -> report.json + histograms");
    add_common(run);
    run->add_option("--byz-fraction", cfg.byz_fraction, "adversary fraction");
    run->add_option("--byz-strategy", strategy,
                    "none|non-responder|equivocator|injector|reorderer|blockspace-censor|"
                    "mempool-censor|colluding-censor");
    run->add_option("--protocol", protocol, "lo|flood");
    run->add_option("--ordering", ordering, "seeded|sorted");
    run->add_flag("--highest-fee-blocks", cfg.highest_fee_blocks,
                  "fee-priority baseline block builder");
    run->add_flag("--force-adversary-leader", cfg.force_adversary_leader,
                  "rotate adversaries into block leadership");

    auto* sweep =
        app.add_subcommand("sweep", "adversary-fraction sweep -> exposure_vs_fraction.csv");
    add_common(sweep);
    std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5};
    std::string sweep_strategy = "colluding-censor";
    sweep->add_option("--fractions", fractions, "fractions to sweep");
    sweep->add_option("--byz-strategy", sweep_strategy, "strategy under sweep");

    auto* compare =
        app.add_subcommand("compare", "same seed under lo and flood -> bandwidth.csv");
    add_common(compare);

    auto* fairness = app.add_subcommand(
        "fairness", "natural vs fee-priority inclusion latency -> inclusion.csv");
    add_common(fairness);
    int fairness_seeds = 10;
    fairness->add_option("--seeds", fairness_seeds, "number of seeds per arm");

    auto* vectors = app.add_subcommand("vectors", "emit frozen regression vectors");
    vectors->add_option("--out", out_dir, "output directory");

    auto* accept = app.add_subcommand("accept", "full acceptance suite (exit = failures)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            cfg.byz_strategy = adversary_from(strategy);
            cfg.protocol = protocol_from(protocol);
            cfg.engine.block.ordering = ordering_from(ordering);
            SimResult res = run_simulation(cfg);
            write_run_outputs(out_dir, cfg, res);
        } else if (sweep->parsed()) {
            cfg.byz_strategy = adversary_from(sweep_strategy);
            cfg.force_adversary_leader = true;
            fs::create_directories(out_dir);
            std::ostringstream csv;
            csv << "byz_fraction,byz_count,first_exposure_s,propagation_max_s,"
                   "exposed_everywhere\n";
            for (double f : fractions) {
                cfg.byz_fraction = f;
                SimResult res = run_simulation(cfg);
                csv << f << "," << res.byz_count << "," << res.first_exposure_time << ","
                    << res.exposure_propagation_max << "," << res.byz_exposed_everywhere
                    << "\n";
                std::cout << "fraction " << f << ": propagation "
                          << res.exposure_propagation_max << "s\n";
            }
            write_file(fs::path(out_dir) / "exposure_vs_fraction.csv", csv.str());
        } else if (compare->parsed()) {
            fs::create_directories(out_dir);
            cfg.protocol = Protocol::LO;
            SimResult lo_res = run_simulation(cfg);
            cfg.protocol = Protocol::Flood;
            SimResult fl_res = run_simulation(cfg);
            std::ostringstream csv;
            csv << "protocol,control_bytes,kb_per_node_min,reconciliations_per_min\n";
            double mins = cfg.duration_s / 60.0;
            cfg.protocol = Protocol::LO;
            csv << "lo," << lo_res.control_bytes << "," << control_kb_per_node_min(cfg, lo_res)
                << "," << double(lo_res.reconciliations) / mins << "\n";
            cfg.protocol = Protocol::Flood;
            csv << "flood," << fl_res.control_bytes << ","
                << control_kb_per_node_min(cfg, fl_res) << ",0\n";
            write_file(fs::path(out_dir) / "bandwidth.csv", csv.str());
            std::cout << "lo/flood byte ratio: "
                      << double(lo_res.control_bytes) / double(fl_res.control_bytes) << "\n";
        } else if (fairness->parsed()) {
            fs::create_directories(out_dir);
            std::ostringstream csv;
            csv << "seed,natural_mean_s,natural_p95_s,fee_mean_s,fee_p95_s\n";
            uint64_t base = cfg.seed;
            for (int s = 0; s < fairness_seeds; ++s) {
                cfg.seed = base + uint64_t(s);
                cfg.highest_fee_blocks = false;
                Summary nat = summarize(run_simulation(cfg).inclusion_latency);
                cfg.highest_fee_blocks = true;
                Summary fee = summarize(run_simulation(cfg).inclusion_latency);
                csv << cfg.seed << "," << nat.mean << "," << nat.p95 << "," << fee.mean << ","
                    << fee.p95 << "\n";
            }
            write_file(fs::path(out_dir) / "inclusion.csv", csv.str());
        } else if (vectors->parsed()) {
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / "sketch_vectors.txt", sketch_vectors_text());
            write_file(fs::path(out_dir) / "clock_vectors.txt", clock_vectors_text());
            write_file(fs::path(out_dir) / "shuffle_vectors.txt", shuffle_vectors_text());
        } else if (accept->parsed()) {
            return run_acceptance(std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
