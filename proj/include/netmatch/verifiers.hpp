#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "netmatch/market.hpp"
#include "netmatch/mechanisms.hpp"

/// Brute-force property checkers with counterexample extraction: IR, Pareto
/// dominance/efficiency, blocking-coalition search (core, SC4N, core for
/// paths) and exhaustive strategy-proofness auditing of any mechanism.
namespace netmatch {

/// Agents whose endowment strictly beats their assigned house under the true
/// preferences; empty list <=> the allocation is individually rational.
inline std::vector<AgentId> check_ir(const MarketInstance& inst, const Allocation& alloc) {
    std::vector<AgentId> violators;
    for (AgentId i = 1; i <= inst.n; ++i)
        if (rank(inst.pref(i), i) < rank(inst.pref(i), alloc.held(i))) violators.push_back(i);
    return violators;
}

/// True iff every agent weakly prefers a to b and someone strictly does.
inline bool pareto_dominates(const Allocation& a, const Allocation& b,
                             const MarketInstance& inst) {
    bool strict = false;
    for (AgentId i = 1; i <= inst.n; ++i) {
        int ra = rank(inst.pref(i), a.held(i));
        int rb = rank(inst.pref(i), b.held(i));
        if (ra > rb) return false;
        if (ra < rb) strict = true;
    }
    return strict;
}

/// Exhaustive Pareto check over all reallocations of the market agents'
/// houses (outsiders keep their endowments). Returns a dominating witness,
/// or nothing when the allocation is Pareto efficient.
inline std::optional<Allocation> check_pareto_efficient(const MarketInstance& inst,
                                                        const Allocation& alloc,
                                                        int max_n = 8) {
    if (inst.n > max_n)
        throw CapabilityError("pareto check: n = " + std::to_string(inst.n) +
                              " exceeds the brute-force bound " + std::to_string(max_n));
    validate_allocation(alloc);
    const std::vector<AgentId> members = alloc.market_agents();
    std::vector<HouseId> houses;
    for (AgentId i : members) houses.push_back(i);
    std::sort(houses.begin(), houses.end());
    do {
        Allocation candidate(inst.n);
        for (std::size_t idx = 0; idx < members.size(); ++idx)
            candidate.assigned[members[idx]] = houses[idx];
        if (pareto_dominates(candidate, alloc, inst)) return candidate;
    } while (std::next_permutation(houses.begin(), houses.end()));
    return std::nullopt;
}

/// Which coalitions a stability notion ranges over.
enum class CoalitionFamily {
    all_subsets,     // the core
    adjacent_pairs,  // SC4N: parent-child pairs on the invitation network
    path_subsets,    // core for paths: subsets of some root path P_i
};

/// Whether a coalition reallocates its endowments or its assigned houses.
enum class BlockingItems { endowments, assigned };

struct BlockingCoalition {
    std::vector<AgentId> members;                          // sorted
    std::vector<std::pair<AgentId, HouseId>> reallocation; // per member
};

namespace detail {

/// Endowment blocking: the coalition trades its own endowments while everyone
/// else keeps the allocation, so it must be feasible as a total allocation
/// (the coalition's endowment set equals its assigned set) and every member
/// actually trades away from its endowment.
inline std::optional<BlockingCoalition> try_block(const MarketInstance& inst,
                                                  const Allocation& alloc,
                                                  const std::vector<AgentId>& members,
                                                  BlockingItems items) {
    std::vector<HouseId> pool;
    if (items == BlockingItems::endowments) {
        std::vector<HouseId> endow = members;
        std::vector<HouseId> held;
        for (AgentId i : members) held.push_back(alloc.held(i));
        std::sort(held.begin(), held.end());
        if (held != endow) return std::nullopt;  // infeasible for outsiders
        pool = endow;
    } else {
        for (AgentId i : members) pool.push_back(alloc.held(i));
        std::sort(pool.begin(), pool.end());
    }
    do {
        bool ok = true;
        bool strict = false;
        for (std::size_t idx = 0; idx < members.size() && ok; ++idx) {
            AgentId i = members[idx];
            HouseId z = pool[idx];
            if (items == BlockingItems::endowments && z == i) {
                ok = false;  // member would sit on its own endowment
                break;
            }
            int rz = rank(inst.pref(i), z);
            int rx = rank(inst.pref(i), alloc.held(i));
            if (rz > rx) ok = false;
            else if (rz < rx) strict = true;
        }
        if (ok && strict) {
            BlockingCoalition out;
            out.members = members;
            for (std::size_t idx = 0; idx < members.size(); ++idx)
                out.reallocation.emplace_back(members[idx], pool[idx]);
            return out;
        }
    } while (std::next_permutation(pool.begin(), pool.end()));
    return std::nullopt;
}

inline std::vector<std::vector<AgentId>> family_candidates(const MarketInstance& inst,
                                                           CoalitionFamily family,
                                                           int max_n) {
    std::set<std::vector<AgentId>> dedup;
    switch (family) {
        case CoalitionFamily::all_subsets: {
            if (inst.n > max_n || inst.n > 24)
                throw CapabilityError("core search: n = " + std::to_string(inst.n) +
                                      " exceeds the brute-force bound " + std::to_string(max_n));
            for (std::uint64_t mask = 1; mask < (1ull << inst.n); ++mask) {
                std::vector<AgentId> s;
                for (AgentId i = 1; i <= inst.n; ++i)
                    if (mask & (1ull << (i - 1))) s.push_back(i);
                dedup.insert(std::move(s));
            }
            break;
        }
        case CoalitionFamily::adjacent_pairs: {
            for (const auto& [p, c] : inst.network.edges)
                if (p != kOrganizer) dedup.insert({std::min(p, c), std::max(p, c)});
            break;
        }
        case CoalitionFamily::path_subsets: {
            Market m = build_market(inst, ReportProfile::truthful(inst));
            std::set<std::vector<AgentId>> paths;
            if (inst.network.shape == NetworkShape::tree) {
                for (AgentId i : m.participants) paths.insert(m.root_path(i));
            } else {
                // Every simple organizer-to-agent path in the DAG.
                std::vector<AgentId> cur;
                auto dfs = [&](auto&& self, AgentId u) -> void {
                    if (u != kOrganizer) {
                        cur.push_back(u);
                        std::vector<AgentId> sorted = cur;
                        std::sort(sorted.begin(), sorted.end());
                        paths.insert(std::move(sorted));
                    }
                    for (AgentId c : m.children[u]) self(self, c);
                    if (u != kOrganizer) cur.pop_back();
                };
                dfs(dfs, kOrganizer);
            }
            for (const auto& path : paths) {
                if (path.size() > 20)
                    throw CapabilityError("path-subset search: root path longer than 20");
                for (std::uint64_t mask = 1; mask < (1ull << path.size()); ++mask) {
                    std::vector<AgentId> s;
                    for (std::size_t b = 0; b < path.size(); ++b)
                        if (mask & (1ull << b)) s.push_back(path[b]);
                    dedup.insert(std::move(s));
                }
            }
            break;
        }
    }
    std::vector<std::vector<AgentId>> out(dedup.begin(), dedup.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

}  // namespace detail

/// First blocking coalition in (size, lexicographic) order, or nothing when
/// the allocation is stable with respect to the family.
inline std::optional<BlockingCoalition> find_blocking_coalition(
    const MarketInstance& inst, const Allocation& alloc, CoalitionFamily family,
    BlockingItems items = BlockingItems::endowments, int max_n = 8) {
    validate_allocation(alloc);
    for (const auto& members : detail::family_candidates(inst, family, max_n)) {
        auto hit = detail::try_block(inst, alloc, members, items);
        if (hit) return hit;
    }
    return std::nullopt;
}

/// True iff no subset of agents sharing a root path can block.
inline bool check_core_for_paths(const MarketInstance& inst, const Allocation& alloc,
                                 BlockingItems items = BlockingItems::endowments) {
    return !find_blocking_coalition(inst, alloc, CoalitionFamily::path_subsets, items).has_value();
}

struct Deviation {
    AgentId agent = 0;
    PreferenceOrder reported_preference;
    std::vector<AgentId> reported_children;
};

struct SpCounterexample {
    Deviation deviation;
    HouseId truthful_outcome = 0;
    HouseId deviating_outcome = 0;
};

/// Exhaustive dominant-strategy audit at the truthful profile: for each agent
/// in ascending order, every children subset (ascending popcount, then binary
/// value over the sorted child list) crossed with every preference permutation
/// (lexicographic). Returns the first deviation whose outcome strictly beats
/// the truthful outcome under the deviator's true preference.
inline std::optional<SpCounterexample> check_strategy_proof(Mechanism kind,
                                                            const MarketInstance& inst,
                                                            int max_n = 7) {
    if (inst.n > max_n)
        throw CapabilityError("strategy-proofness audit: n = " + std::to_string(inst.n) +
                              " exceeds the brute-force bound " + std::to_string(max_n));
    const ReportProfile truthful = ReportProfile::truthful(inst);
    const Allocation base = run_on(kind, inst, truthful).allocation;

    for (AgentId agent = 1; agent <= inst.n; ++agent) {
        const int truthful_rank = rank(inst.pref(agent), base.held(agent));
        const std::vector<AgentId> children = inst.network.children_of(agent);
        const std::uint64_t subsets = 1ull << children.size();

        std::vector<std::uint64_t> masks(subsets);
        for (std::uint64_t v = 0; v < subsets; ++v) masks[v] = v;
        std::sort(masks.begin(), masks.end(), [](std::uint64_t a, std::uint64_t b) {
            int pa = std::popcount(a), pb = std::popcount(b);
            return pa != pb ? pa < pb : a < b;
        });

        for (std::uint64_t mask : masks) {
            std::vector<AgentId> sub;
            for (std::size_t b = 0; b < children.size(); ++b)
                if (mask & (1ull << b)) sub.push_back(children[b]);

            std::vector<HouseId> perm(inst.n);
            std::iota(perm.begin(), perm.end(), 1);
            do {
                ReportProfile reports = truthful;
                reports.reported_children[agent] = sub;
                reports.reported_preferences[agent] = PreferenceOrder{perm};
                const Allocation out = run_on(kind, inst, reports).allocation;
                if (rank(inst.pref(agent), out.held(agent)) < truthful_rank) {
                    SpCounterexample ce;
                    ce.deviation = Deviation{agent, PreferenceOrder{perm}, sub};
                    ce.truthful_outcome = base.held(agent);
                    ce.deviating_outcome = out.held(agent);
                    return ce;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }
    return std::nullopt;
}

}  // namespace netmatch
