#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "netmatch/generators.hpp"
#include "netmatch/market.hpp"
#include "netmatch/mechanisms.hpp"

/// Experiment runner: swap counts and position improvements across
/// mechanisms, network sizes and seeds, with CSV and SVG outputs.
namespace netmatch {

struct BenchConfig {
    std::vector<int> sizes;
    int trials_per_size = 50;
    std::vector<Mechanism> mechanisms = all_mechanisms();
    std::uint64_t master_seed = 0;
    NetworkShape shape = NetworkShape::tree;
    int extra_edges = 0;  // graph shape only
};

struct BenchRecord {
    int size = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    Mechanism mechanism = Mechanism::classic_ttc;
    int swaps = 0;
    double avg_improvement = 0.0;
    double runtime_ms = 0.0;
};

/// One record per (size, trial, mechanism); rows come out sorted that way so
/// output is independent of execution schedule. Deterministic in master_seed
/// except for the runtime column.
inline std::vector<BenchRecord> run_benchmark(const BenchConfig& cfg) {
    if (cfg.sizes.empty()) throw ValidationError("bench: no sizes given");
    if (cfg.trials_per_size < 1) throw ValidationError("bench: trials_per_size must be >= 1");
    if (cfg.mechanisms.empty()) throw ValidationError("bench: no mechanisms given");

    std::vector<BenchRecord> records;
    for (int size : cfg.sizes) {
        for (int trial = 0; trial < cfg.trials_per_size; ++trial) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, size, trial);
            GenConfig gen{size, cfg.shape, cfg.extra_edges, seed};
            const MarketInstance inst = gen_instance(gen);
            const ReportProfile truthful = ReportProfile::truthful(inst);
            const Market market = build_market(inst, truthful);
            for (Mechanism mech : cfg.mechanisms) {
                const auto t0 = std::chrono::steady_clock::now();
                const auto result =
                    run(MechanismId{mech, cfg.shape}, market, truthful.reported_preferences);
                const auto t1 = std::chrono::steady_clock::now();
                const OutcomeMetrics m = metrics(inst, result.allocation);
                BenchRecord rec;
                rec.size = size;
                rec.trial = trial;
                rec.seed = seed;
                rec.mechanism = mech;
                rec.swaps = m.swap_count;
                rec.avg_improvement = m.average_improvement;
                rec.runtime_ms =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
                records.push_back(rec);
            }
        }
    }
    std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
        if (a.size != b.size) return a.size < b.size;
        if (a.trial != b.trial) return a.trial < b.trial;
        return static_cast<int>(a.mechanism) < static_cast<int>(b.mechanism);
    });
    return records;
}

struct SummaryRow {
    int size = 0;
    Mechanism mechanism = Mechanism::classic_ttc;
    int trials = 0;
    double mean_swaps = 0.0;
    double sd_swaps = 0.0;
    double mean_improvement = 0.0;
    double sd_improvement = 0.0;
};

/// Per-(size, mechanism) means and population standard deviations.
inline std::vector<SummaryRow> summarize(const std::vector<BenchRecord>& records) {
    if (records.empty()) throw ValidationError("summarize: no records");
    std::map<std::pair<int, int>, std::vector<const BenchRecord*>> groups;
    for (const auto& r : records)
        groups[{r.size, static_cast<int>(r.mechanism)}].push_back(&r);
    std::vector<SummaryRow> rows;
    for (const auto& [key, group] : groups) {
        SummaryRow row;
        row.size = key.first;
        row.mechanism = static_cast<Mechanism>(key.second);
        row.trials = static_cast<int>(group.size());
        double s = 0, s2 = 0, im = 0, im2 = 0;
        for (const BenchRecord* r : group) {
            s += r->swaps;
            s2 += static_cast<double>(r->swaps) * r->swaps;
            im += r->avg_improvement;
            im2 += r->avg_improvement * r->avg_improvement;
        }
        const double k = static_cast<double>(group.size());
        row.mean_swaps = s / k;
        row.sd_swaps = std::sqrt(std::max(0.0, s2 / k - row.mean_swaps * row.mean_swaps));
        row.mean_improvement = im / k;
        row.sd_improvement =
            std::sqrt(std::max(0.0, im2 / k - row.mean_improvement * row.mean_improvement));
        rows.push_back(row);
    }
    return rows;
}

inline std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

inline std::string to_csv(const std::vector<BenchRecord>& records) {
    std::string out = "size,trial,seed,mechanism,swaps,avg_improvement,runtime_ms\n";
    for (const auto& r : records) {
        out += std::to_string(r.size) + ',' + std::to_string(r.trial) + ',' +
               std::to_string(r.seed) + ',' + to_string(r.mechanism) + ',' +
               std::to_string(r.swaps) + ',' + format_fixed(r.avg_improvement, 6) + ',' +
               format_fixed(r.runtime_ms, 3) + '\n';
    }
    return out;
}

inline void write_csv(const std::vector<BenchRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << to_csv(records);
}

enum class PlotMetric { swaps, improvement };

/// Self-contained SVG line chart: one polyline per mechanism, x = network
/// size, y = the mean of the chosen metric.
inline std::string render_plot(const std::vector<SummaryRow>& summary, PlotMetric metric) {
    if (summary.empty()) throw ValidationError("plot: empty summary");
    const double width = 640, height = 420, ml = 64, mr = 168, mt = 32, mb = 48;

    std::vector<int> sizes;
    std::vector<Mechanism> mechs;
    double ymax = 0;
    for (const auto& row : summary) {
        sizes.push_back(row.size);
        if (std::find(mechs.begin(), mechs.end(), row.mechanism) == mechs.end())
            mechs.push_back(row.mechanism);
        ymax = std::max(ymax, metric == PlotMetric::swaps ? row.mean_swaps : row.mean_improvement);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::sort(mechs.begin(), mechs.end(),
              [](Mechanism a, Mechanism b) { return static_cast<int>(a) < static_cast<int>(b); });
    if (ymax <= 0) ymax = 1;
    const double x0 = static_cast<double>(sizes.front());
    const double x1 = static_cast<double>(sizes.back());
    const auto sx = [&](double v) {
        return x1 == x0 ? ml + (width - ml - mr) / 2
                        : ml + (v - x0) / (x1 - x0) * (width - ml - mr);
    };
    const auto sy = [&](double v) { return height - mb - v / ymax * (height - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    const char* title = metric == PlotMetric::swaps ? "Mean number of swaps"
                                                    : "Mean position improvement per agent";

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_fixed(width, 0) +
           "\" height=\"" + format_fixed(height, 0) + "\" viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_fixed(ml, 0) + "\" y=\"20\" font-family=\"sans-serif\" "
           "font-size=\"14\">" + std::string(title) + "</text>\n";
    // axes
    svg += "<line x1=\"" + format_fixed(ml, 1) + "\" y1=\"" + format_fixed(height - mb, 1) +
           "\" x2=\"" + format_fixed(width - mr, 1) + "\" y2=\"" + format_fixed(height - mb, 1) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + format_fixed(ml, 1) + "\" y1=\"" + format_fixed(mt, 1) + "\" x2=\"" +
           format_fixed(ml, 1) + "\" y2=\"" + format_fixed(height - mb, 1) +
           "\" stroke=\"black\"/>\n";
    for (int s : sizes) {
        svg += "<text x=\"" + format_fixed(sx(s), 1) + "\" y=\"" + format_fixed(height - mb + 18, 1) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               std::to_string(s) + "</text>\n";
    }
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = ymax * tick / 4.0;
        svg += "<text x=\"" + format_fixed(ml - 6, 1) + "\" y=\"" + format_fixed(sy(v) + 4, 1) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
               format_fixed(v, 2) + "</text>\n";
    }
    int ci = 0;
    for (Mechanism mech : mechs) {
        std::string points;
        for (int s : sizes) {
            for (const auto& row : summary)
                if (row.size == s && row.mechanism == mech) {
                    const double v =
                        metric == PlotMetric::swaps ? row.mean_swaps : row.mean_improvement;
                    points += format_fixed(sx(s), 1) + "," + format_fixed(sy(v), 1) + " ";
                }
        }
        const char* color = colors[ci % 5];
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = mt + 18.0 * ci;
        svg += "<line x1=\"" + format_fixed(width - mr + 12, 1) + "\" y1=\"" +
               format_fixed(ly, 1) + "\" x2=\"" + format_fixed(width - mr + 34, 1) + "\" y2=\"" +
               format_fixed(ly, 1) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + format_fixed(width - mr + 40, 1) + "\" y=\"" +
               format_fixed(ly + 4, 1) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
               to_string(mech) + "</text>\n";
        ++ci;
    }
    svg += "</svg>\n";
    return svg;
}

inline void emit_plot(const std::vector<SummaryRow>& summary, PlotMetric metric,
                      const std::string& path) {
    const std::string svg = render_plot(summary, metric);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << svg;
}

}  // namespace netmatch
