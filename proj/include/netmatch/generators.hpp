#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "netmatch/market.hpp"

/// Seeded random instance generation: uniform recursive trees, forward-edge
/// DAGs and i.i.d. uniform preference profiles. Everything is a pure function
/// of its seed.
namespace netmatch {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag));
}

/// Uniform draw from [0, bound); bias from the modulo is ~2^-60, far below
/// anything the statistical tests can see.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    return rng() % bound;
}

template <typename T>
inline void fisher_yates(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t k = items.size(); k > 1; --k)
        std::swap(items[k - 1], items[bounded(rng, k)]);
}

constexpr std::uint64_t kTreeTag = 0x74726565;   // stream tags keep the
constexpr std::uint64_t kPrefTag = 0x70726566;   // generators independent
constexpr std::uint64_t kDagTag = 0x64616721;    // of each other
constexpr std::uint64_t kTrialTag = 0x747269616cull;

}  // namespace detail

struct GenConfig {
    int n = 1;
    NetworkShape shape = NetworkShape::tree;
    int extra_edges = 0;  // graph shape only
    std::uint64_t master_seed = 0;
};

/// Per-trial seed so benchmark trials are independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master_seed, int size, int trial_index) {
    std::uint64_t s = detail::splitmix64(master_seed ^ detail::kTrialTag);
    s = detail::splitmix64(s ^ detail::splitmix64(static_cast<std::uint64_t>(size)));
    s = detail::splitmix64(s ^ detail::splitmix64(static_cast<std::uint64_t>(trial_index)));
    return s;
}

/// Uniform random recursive tree rooted at the organizer: node k attaches to
/// a parent drawn uniformly from {0, 1, ..., k-1}.
inline InvitationNetwork gen_tree(int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("gen_tree: need at least one agent");
    std::mt19937_64 rng(detail::mix_seed(seed, detail::kTreeTag));
    InvitationNetwork net;
    net.n = n;
    net.shape = NetworkShape::tree;
    for (AgentId k = 1; k <= n; ++k)
        net.edges.emplace_back(static_cast<AgentId>(detail::bounded(rng, k)), k);
    return net;
}

/// Each agent's ranking is an independent uniform permutation of the n houses
/// (Fisher-Yates on a per-agent stream derived from the seed).
inline std::vector<PreferenceOrder> gen_preferences(int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("gen_preferences: need at least one agent");
    std::vector<PreferenceOrder> prefs(n + 1);
    for (AgentId i = 1; i <= n; ++i) {
        std::mt19937_64 rng(
            detail::mix_seed(seed, detail::splitmix64(detail::kPrefTag ^ static_cast<std::uint64_t>(i))));
        std::vector<HouseId> order(n);
        std::iota(order.begin(), order.end(), 1);
        detail::fisher_yates(order, rng);
        prefs[i] = PreferenceOrder{std::move(order)};
    }
    return prefs;
}

/// gen_tree backbone plus extra distinct forward agent-to-agent edges
/// (parent id < child id), sampled without replacement; acyclic by
/// construction. extra_edges = 0 reproduces the tree's edge set.
inline InvitationNetwork gen_dag(int n, int extra_edges, std::uint64_t seed) {
    InvitationNetwork net = gen_tree(n, seed);
    net.shape = NetworkShape::graph;
    if (extra_edges < 0) throw ValidationError("gen_dag: negative extra edge count");
    std::vector<std::vector<char>> present(n + 1, std::vector<char>(n + 1, 0));
    for (const auto& [p, c] : net.edges) present[p][c] = 1;
    std::vector<std::pair<AgentId, AgentId>> candidates;
    for (AgentId u = 1; u <= n; ++u)
        for (AgentId v = u + 1; v <= n; ++v)
            if (!present[u][v]) candidates.emplace_back(u, v);
    if (static_cast<std::size_t>(extra_edges) > candidates.size())
        throw ValidationError("gen_dag: extra_edges = " + std::to_string(extra_edges) +
                              " infeasible, only " + std::to_string(candidates.size()) +
                              " forward slots exist");
    std::mt19937_64 rng(detail::mix_seed(seed, detail::kDagTag));
    detail::fisher_yates(candidates, rng);
    net.edges.insert(net.edges.end(), candidates.begin(), candidates.begin() + extra_edges);
    return net;
}

/// Star: the organizer invites everyone directly.
inline InvitationNetwork star_network(int n) {
    InvitationNetwork net;
    net.n = n;
    net.shape = NetworkShape::tree;
    for (AgentId i = 1; i <= n; ++i) net.edges.emplace_back(kOrganizer, i);
    return net;
}

inline MarketInstance gen_instance(const GenConfig& cfg) {
    MarketInstance inst;
    inst.n = cfg.n;
    inst.network = cfg.shape == NetworkShape::tree
                       ? gen_tree(cfg.n, cfg.master_seed)
                       : gen_dag(cfg.n, cfg.extra_edges, cfg.master_seed);
    inst.true_preferences = gen_preferences(cfg.n, cfg.master_seed);
    validate_instance(inst);
    return inst;
}

}  // namespace netmatch
