// Command-line front end: mechanism runs, property verification, instance
// generation and the benchmark harness.
//
// Exit codes: 0 success/pass, 1 property fail, 2 input error, 3 capability
// bound exceeded.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netmatch/bench.hpp"
#include "netmatch/generators.hpp"
#include "netmatch/io.hpp"
#include "netmatch/market.hpp"
#include "netmatch/mechanisms.hpp"
#include "netmatch/verifiers.hpp"

namespace {

using namespace netmatch;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitCapability = 3;

std::string rule_name(ConflictRecord::Rule rule) {
    switch (rule) {
        case ConflictRecord::Rule::ancestor_house: return "ancestor-house";
        case ConflictRecord::Rule::descendant_house: return "descendant-house";
        case ConflictRecord::Rule::sibling_between: return "sibling-between";
    }
    return "?";
}

void print_trace(const RunTrace& trace) {
    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
        const auto& round = trace.rounds[r];
        std::cout << "round " << r + 1 << ":\n";
        std::cout << "  pointers:";
        for (const auto& [a, h] : round.pointers) std::cout << ' ' << a << "->" << h;
        std::cout << '\n';
        for (const auto& c : round.conflicts)
            std::cout << "  conflict (" << c.i << ", " << c.j << ") on house " << c.house << ": "
                      << rule_name(c.rule) << ", agent " << c.excluded_agent << " repoints\n";
        for (const auto& ch : round.chains) {
            std::cout << "  chain from " << ch.k << " (pair " << ch.i << ", " << ch.j << "):";
            for (AgentId a : ch.chain) std::cout << ' ' << a;
            std::cout << " | committed:";
            for (AgentId a : ch.committed_cycle) std::cout << ' ' << a;
            std::cout << '\n';
        }
        for (const auto& cycle : round.removed_cycles) {
            std::cout << "  cycle:";
            for (AgentId a : cycle) std::cout << ' ' << a;
            std::cout << '\n';
        }
    }
}

int cmd_run(const std::string& mechanism, const std::string& instance_path,
            const std::string& report_path, bool trace) {
    const MarketInstance inst = load_instance(instance_path);
    const Mechanism kind = parse_mechanism(mechanism);
    const ReportProfile reports = report_path.empty()
                                      ? ReportProfile::truthful(inst)
                                      : parse_report(read_file(report_path), inst);
    const MechanismResult result = run_on(kind, inst, reports);
    for (AgentId i = 1; i <= inst.n; ++i)
        if (result.allocation.in_market(i))
            std::cout << i << " -> " << result.allocation.assigned[i] << '\n';
    if (trace) print_trace(result.trace);
    return kExitPass;
}

int cmd_verify(const std::string& property, const std::string& mechanism,
               const std::string& instance_path, int max_n, const std::string& items_token) {
    const MarketInstance inst = load_instance(instance_path);
    const Mechanism kind = parse_mechanism(mechanism);
    const BlockingItems items =
        items_token == "assigned" ? BlockingItems::assigned : BlockingItems::endowments;

    const auto blocking = [&](CoalitionFamily family) -> int {
        const Allocation alloc = run_truthful(kind, inst).allocation;
        auto hit = find_blocking_coalition(inst, alloc, family, items, max_n);
        if (!hit) {
            std::cout << "PASS " << property << " " << mechanism << "\n";
            return kExitPass;
        }
        std::cout << "FAIL " << property << " " << mechanism << ": coalition {";
        for (std::size_t idx = 0; idx < hit->members.size(); ++idx)
            std::cout << (idx ? ", " : "") << hit->members[idx];
        std::cout << "} reallocates";
        for (const auto& [a, h] : hit->reallocation) std::cout << ' ' << a << "->" << h;
        std::cout << '\n';
        return kExitFail;
    };

    if (property == "ir") {
        const Allocation alloc = run_truthful(kind, inst).allocation;
        const auto violators = check_ir(inst, alloc);
        if (violators.empty()) {
            std::cout << "PASS ir " << mechanism << "\n";
            return kExitPass;
        }
        std::cout << "FAIL ir " << mechanism << ": violators";
        for (AgentId v : violators) std::cout << ' ' << v;
        std::cout << '\n';
        return kExitFail;
    }
    if (property == "pe") {
        const Allocation alloc = run_truthful(kind, inst).allocation;
        auto witness = check_pareto_efficient(inst, alloc, max_n);
        if (!witness) {
            std::cout << "PASS pe " << mechanism << "\n";
            return kExitPass;
        }
        std::cout << "FAIL pe " << mechanism << ": dominated by";
        for (AgentId i = 1; i <= inst.n; ++i)
            if (witness->in_market(i)) std::cout << ' ' << i << "->" << witness->assigned[i];
        std::cout << '\n';
        return kExitFail;
    }
    if (property == "sp") {
        auto ce = check_strategy_proof(kind, inst, max_n);
        if (!ce) {
            std::cout << "PASS sp " << mechanism << "\n";
            return kExitPass;
        }
        std::cout << "FAIL sp " << mechanism << ": agent " << ce->deviation.agent
                  << " gains " << ce->truthful_outcome << " -> " << ce->deviating_outcome
                  << " reporting children {";
        for (std::size_t idx = 0; idx < ce->deviation.reported_children.size(); ++idx)
            std::cout << (idx ? ", " : "") << ce->deviation.reported_children[idx];
        std::cout << "} and preference";
        for (HouseId h : ce->deviation.reported_preference.ranking) std::cout << ' ' << h;
        std::cout << '\n';
        return kExitFail;
    }
    if (property == "core") return blocking(CoalitionFamily::all_subsets);
    if (property == "sc4n") return blocking(CoalitionFamily::adjacent_pairs);
    if (property == "cp") return blocking(CoalitionFamily::path_subsets);
    throw ValidationError("unknown property '" + property + "'");
}

int cmd_gen(int n, std::uint64_t seed, const std::string& shape_token, int extra_edges,
            const std::string& out_path) {
    GenConfig cfg;
    cfg.n = n;
    cfg.master_seed = seed;
    if (shape_token == "tree") cfg.shape = NetworkShape::tree;
    else if (shape_token == "graph") cfg.shape = NetworkShape::graph;
    else throw ValidationError("gen: shape must be tree or graph");
    cfg.extra_edges = extra_edges;
    if (cfg.shape == NetworkShape::tree && extra_edges != 0)
        throw ValidationError("gen: extra edges require --shape graph");
    const std::string text = serialize_instance(gen_instance(cfg));
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
    return kExitPass;
}

std::vector<Mechanism> parse_mechanism_list(const std::string& token) {
    if (token == "all") return all_mechanisms();
    std::vector<Mechanism> out;
    std::string cur;
    std::istringstream in(token);
    while (std::getline(in, cur, ',')) out.push_back(parse_mechanism(cur));
    if (out.empty()) throw ValidationError("bench: no mechanisms given");
    return out;
}

std::vector<int> parse_size_list(const std::string& token) {
    std::vector<int> out;
    std::string cur;
    std::istringstream in(token);
    while (std::getline(in, cur, ',')) out.push_back(std::stoi(cur));
    return out;
}

int cmd_bench(const std::string& sizes, int trials, std::uint64_t seed,
              const std::string& mechanisms, const std::string& shape_token,
              int extra_edges, const std::string& out_path, const std::string& plot_dir) {
    BenchConfig cfg;
    cfg.sizes = parse_size_list(sizes);
    cfg.trials_per_size = trials;
    cfg.master_seed = seed;
    cfg.mechanisms = parse_mechanism_list(mechanisms);
    if (shape_token == "tree") cfg.shape = NetworkShape::tree;
    else if (shape_token == "graph") cfg.shape = NetworkShape::graph;
    else throw ValidationError("bench: shape must be tree or graph");
    cfg.extra_edges = extra_edges;

    const auto records = run_benchmark(cfg);
    write_csv(records, out_path);
    std::cout << "wrote " << records.size() << " records to " << out_path << '\n';
    if (!plot_dir.empty()) {
        const auto summary = summarize(records);
        emit_plot(summary, PlotMetric::swaps, plot_dir + "/swaps.svg");
        emit_plot(summary, PlotMetric::improvement, plot_dir + "/improvement.svg");
        std::cout << "wrote " << plot_dir << "/swaps.svg and " << plot_dir
                  << "/improvement.svg\n";
    }
    return kExitPass;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"House-allocation mechanisms over invitation networks"};
    app.require_subcommand(1);

    std::string mechanism = "ttcd", instance_path, report_path, property;
    bool trace = false;
    int max_n = -1;
    std::string items = "endowments";

    auto* run_cmd = app.add_subcommand("run", "Run a mechanism on an instance");
    run_cmd->add_option("--mechanism", mechanism, "Mechanism id")->required();
    run_cmd->add_option("--instance", instance_path, "Instance file")->required();
    run_cmd->add_option("--report", report_path, "Report overrides file");
    run_cmd->add_flag("--trace", trace, "Print the per-round trace");

    auto* verify_cmd = app.add_subcommand("verify", "Check a property of a mechanism");
    verify_cmd->add_option("--property", property, "ir|pe|sp|core|sc4n|cp")->required();
    verify_cmd->add_option("--mechanism", mechanism, "Mechanism id")->required();
    verify_cmd->add_option("--instance", instance_path, "Instance file")->required();
    verify_cmd->add_option("--max-n", max_n, "Override the brute-force bound");
    verify_cmd->add_option("--blocking-items", items,
                           "Coalition item set: endowments|assigned");

    int gen_n = 1, extra_edges = 0;
    std::uint64_t seed = 0;
    std::string shape = "tree", out_path, plot_dir;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance");
    gen_cmd->add_option("--n", gen_n, "Agent count")->required();
    gen_cmd->add_option("--seed", seed, "64-bit seed")->required();
    gen_cmd->add_option("--shape", shape, "tree|graph");
    gen_cmd->add_option("--extra-edges", extra_edges, "Extra DAG edges (graph only)");
    gen_cmd->add_option("--out", out_path, "Output path (stdout when omitted)");

    std::string sizes = "10,20,30,40,50", mechanisms = "all";
    int trials = 50;
    auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark harness");
    bench_cmd->add_option("--sizes", sizes, "Comma-separated agent counts");
    bench_cmd->add_option("--trials", trials, "Trials per size");
    bench_cmd->add_option("--seed", seed, "Master seed")->required();
    bench_cmd->add_option("--mechanisms", mechanisms, "all or comma-separated ids");
    bench_cmd->add_option("--shape", shape, "tree|graph");
    bench_cmd->add_option("--extra-edges", extra_edges, "Extra DAG edges (graph only)");
    bench_cmd->add_option("--out", out_path, "CSV output path")->required();
    bench_cmd->add_option("--plot", plot_dir, "Directory for SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitInput;
    }

    if (run_cmd->parsed()) return cmd_run(mechanism, instance_path, report_path, trace);
    if (verify_cmd->parsed()) {
        int bound = max_n;
        if (bound < 0) bound = (property == "sp") ? 7 : 8;
        return cmd_verify(property, mechanism, instance_path, bound, items);
    }
    if (gen_cmd->parsed()) return cmd_gen(gen_n, seed, shape, extra_edges, out_path);
    if (bench_cmd->parsed())
        return cmd_bench(sizes, trials, seed, mechanisms, shape, extra_edges, out_path, plot_dir);
    return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCapability;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
