#pragma once

// Shared instance builders for the test suites. The small fixtures mirror the
// files under fixtures/ so unit tests do not depend on file IO.

#include <vector>

#include "netmatch/generators.hpp"
#include "netmatch/market.hpp"

namespace nmtest {

using namespace netmatch;

inline MarketInstance make_instance(int n, NetworkShape shape,
                                    std::vector<std::pair<AgentId, AgentId>> edges,
                                    std::vector<std::vector<HouseId>> prefs) {
    MarketInstance inst;
    inst.n = n;
    inst.network.n = n;
    inst.network.shape = shape;
    inst.network.edges = std::move(edges);
    inst.true_preferences.resize(n + 1);
    for (AgentId i = 1; i <= n; ++i) inst.true_preferences[i] = PreferenceOrder{prefs[i - 1]};
    validate_instance(inst);
    return inst;
}

/// Chain 0->1->2->3; prefs 3≻2≻1, 1≻2≻3, 1≻3≻2.
inline MarketInstance p1() {
    return make_instance(3, NetworkShape::tree, {{0, 1}, {1, 2}, {2, 3}},
                         {{3, 2, 1}, {1, 2, 3}, {1, 3, 2}});
}

/// Chain 0->1->2->3->4; completed prefs from 2≻1, 4≻3≻2, 2≻3, 1≻4.
inline MarketInstance p3() {
    return make_instance(4, NetworkShape::tree, {{0, 1}, {1, 2}, {2, 3}, {3, 4}},
                         {{2, 1, 3, 4}, {4, 3, 2, 1}, {2, 3, 1, 4}, {1, 4, 2, 3}});
}

/// Two branches: (0,1), (1,2), (1,3), (2,4).
inline MarketInstance p4() {
    return make_instance(4, NetworkShape::tree, {{0, 1}, {1, 2}, {1, 3}, {2, 4}},
                         {{4, 3, 2, 1}, {3, 1, 2, 4}, {4, 1, 2, 3}, {3, 2, 4, 1}});
}

/// DAG (0,1), (0,2), (1,3), (3,2); prefs 2≻1, 1≻2, 1≻3 (completed).
inline MarketInstance graph_case1() {
    return make_instance(3, NetworkShape::graph, {{0, 1}, {0, 2}, {1, 3}, {3, 2}},
                         {{2, 1, 3}, {1, 2, 3}, {1, 3, 2}});
}

/// Same DAG; prefs 3≻2≻1, 3≻1≻2, 2≻3 (completed).
inline MarketInstance graph_case2() {
    return make_instance(3, NetworkShape::graph, {{0, 1}, {0, 2}, {1, 3}, {3, 2}},
                         {{3, 2, 1}, {3, 1, 2}, {2, 3, 1}});
}

inline MarketInstance star_instance(int n, std::uint64_t seed) {
    MarketInstance inst;
    inst.n = n;
    inst.network = star_network(n);
    inst.true_preferences = gen_preferences(n, seed);
    validate_instance(inst);
    return inst;
}

inline MarketInstance random_tree_instance(int n, std::uint64_t seed) {
    return gen_instance(GenConfig{n, NetworkShape::tree, 0, seed});
}

/// Caps the request at the worst-case number of free forward slots.
inline int feasible_extra(int n, int want) {
    return std::min(want, (n - 1) * (n - 2) / 2);
}

inline MarketInstance random_dag_instance(int n, int extra, std::uint64_t seed) {
    return gen_instance(GenConfig{n, NetworkShape::graph, feasible_extra(n, extra), seed});
}

/// Full allocation over all n agents: houses[i-1] goes to agent i.
inline Allocation make_alloc(const std::vector<HouseId>& houses) {
    Allocation a(static_cast<int>(houses.size()));
    for (std::size_t i = 0; i < houses.size(); ++i) a.assigned[i + 1] = houses[i];
    return a;
}

inline std::vector<HouseId> held_vector(const Allocation& a) {
    std::vector<HouseId> out;
    for (AgentId i = 1; i <= a.n; ++i) out.push_back(a.held(i));
    return out;
}

}  // namespace nmtest
