#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

/// Core model for house-allocation markets over invitation networks:
/// identities, preferences, the invitation graph, participation semantics,
/// relation queries and outcome metrics.
namespace netmatch {

/// Agents are 1..n; id 0 is the organizer (owns no house).
using AgentId = int;
/// Houses carry the id of their endowed owner, so house i belongs to agent i.
using HouseId = int;

constexpr AgentId kOrganizer = 0;

enum class NetworkShape { tree, graph };

inline const char* to_string(NetworkShape s) {
    return s == NetworkShape::tree ? "tree" : "graph";
}

/// Malformed input (bad ids, non-permutation preferences, invalid reports, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Instance exceeds a brute-force search bound.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Strict, complete preference order over all n houses.
/// ranking[0] is the most preferred house.
struct PreferenceOrder {
    std::vector<HouseId> ranking;

    PreferenceOrder() = default;
    explicit PreferenceOrder(std::vector<HouseId> order) : ranking(std::move(order)) {}

    int size() const { return static_cast<int>(ranking.size()); }

    /// True iff ranking is a permutation of 1..n.
    bool is_permutation_of(int n) const {
        if (static_cast<int>(ranking.size()) != n) return false;
        std::vector<char> seen(n + 1, 0);
        for (HouseId h : ranking) {
            if (h < 1 || h > n || seen[h]) return false;
            seen[h] = 1;
        }
        return true;
    }
};

/// 1-based position of house h in the order; rank(p, top) == 1.
inline int rank(const PreferenceOrder& pref, HouseId h) {
    for (int pos = 0; pos < pref.size(); ++pos)
        if (pref.ranking[pos] == h) return pos + 1;
    throw ValidationError("rank: house " + std::to_string(h) + " not in preference order");
}

/// Directed invitation edges. The organizer is node 0; an edge (p, c) means
/// p invited c. Trees give every agent exactly one parent; graphs are DAGs.
struct InvitationNetwork {
    int n = 0;
    NetworkShape shape = NetworkShape::tree;
    std::vector<std::pair<AgentId, AgentId>> edges;

    std::vector<AgentId> children_of(AgentId a) const {
        std::vector<AgentId> out;
        for (const auto& [p, c] : edges)
            if (p == a) out.push_back(c);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::vector<AgentId> parents_of(AgentId a) const {
        std::vector<AgentId> out;
        for (const auto& [p, c] : edges)
            if (c == a) out.push_back(p);
        std::sort(out.begin(), out.end());
        return out;
    }
};

/// The true market: n agents, their invitation network and true preferences.
struct MarketInstance {
    int n = 0;
    InvitationNetwork network;
    std::vector<PreferenceOrder> true_preferences;  // index 0 unused; 1..n

    const PreferenceOrder& pref(AgentId i) const { return true_preferences.at(i); }
};

namespace detail {

inline void validate_network(const InvitationNetwork& net) {
    const int n = net.n;
    if (n < 1) throw ValidationError("network: need at least one agent");
    std::vector<std::vector<AgentId>> children(n + 1), parents(n + 1);
    std::vector<std::vector<char>> seen(n + 1, std::vector<char>(n + 1, 0));
    for (const auto& [p, c] : net.edges) {
        if (p < 0 || p > n || c < 1 || c > n)
            throw ValidationError("network: edge (" + std::to_string(p) + "," + std::to_string(c) +
                                  ") references an unknown node");
        if (p == c) throw ValidationError("network: self-edge at " + std::to_string(c));
        if (seen[p][c]) throw ValidationError("network: duplicate edge (" + std::to_string(p) + "," +
                                              std::to_string(c) + ")");
        seen[p][c] = 1;
        children[p].push_back(c);
        parents[c].push_back(p);
    }
    if (net.shape == NetworkShape::tree) {
        for (AgentId a = 1; a <= n; ++a)
            if (parents[a].size() != 1)
                throw ValidationError("network: tree agent " + std::to_string(a) +
                                      " must have exactly one parent");
    } else {
        // DAG check via Kahn's algorithm; disconnected agents are caught by
        // the reachability pass below.
        std::vector<int> indeg(n + 1, 0);
        for (AgentId a = 1; a <= n; ++a) indeg[a] = static_cast<int>(parents[a].size());
        std::vector<AgentId> queue;
        for (AgentId a = 0; a <= n; ++a)
            if (indeg[a] == 0) queue.push_back(a);
        std::size_t head = 0;
        int visited = 0;
        while (head < queue.size()) {
            AgentId u = queue[head++];
            ++visited;
            for (AgentId c : children[u])
                if (--indeg[c] == 0) queue.push_back(c);
        }
        if (visited != n + 1) throw ValidationError("network: invitation graph contains a cycle");
    }
    // Every agent reachable from the organizer in the true network.
    std::vector<char> reach(n + 1, 0);
    reach[kOrganizer] = 1;
    std::vector<AgentId> stack{kOrganizer};
    while (!stack.empty()) {
        AgentId u = stack.back();
        stack.pop_back();
        for (AgentId c : children[u])
            if (!reach[c]) {
                reach[c] = 1;
                stack.push_back(c);
            }
    }
    for (AgentId a = 1; a <= n; ++a)
        if (!reach[a])
            throw ValidationError("network: agent " + std::to_string(a) +
                                  " is unreachable from the organizer");
}

}  // namespace detail

inline void validate_instance(const MarketInstance& inst) {
    detail::validate_network(inst.network);
    if (inst.network.n != inst.n) throw ValidationError("instance: network size mismatch");
    if (static_cast<int>(inst.true_preferences.size()) != inst.n + 1)
        throw ValidationError("instance: preferences missing for some agent");
    for (AgentId i = 1; i <= inst.n; ++i)
        if (!inst.true_preferences[i].is_permutation_of(inst.n))
            throw ValidationError("instance: preference of agent " + std::to_string(i) +
                                  " is not a permutation of all houses");
}

/// Per-agent reported type: invited children (a subset of the true children)
/// and a reported preference order. Index 0 unused.
struct ReportProfile {
    std::vector<std::vector<AgentId>> reported_children;
    std::vector<PreferenceOrder> reported_preferences;

    static ReportProfile truthful(const MarketInstance& inst) {
        ReportProfile r;
        r.reported_children.resize(inst.n + 1);
        r.reported_preferences.resize(inst.n + 1);
        for (AgentId i = 1; i <= inst.n; ++i) {
            r.reported_children[i] = inst.network.children_of(i);
            r.reported_preferences[i] = inst.true_preferences[i];
        }
        return r;
    }

    const PreferenceOrder& pref(AgentId i) const { return reported_preferences.at(i); }
};

inline void validate_reports(const MarketInstance& inst, const ReportProfile& reports) {
    if (static_cast<int>(reports.reported_children.size()) != inst.n + 1 ||
        static_cast<int>(reports.reported_preferences.size()) != inst.n + 1)
        throw ValidationError("reports: profile size mismatch");
    for (AgentId i = 1; i <= inst.n; ++i) {
        const auto truth = inst.network.children_of(i);
        for (AgentId c : reports.reported_children[i]) {
            if (c < 1 || c > inst.n)
                throw ValidationError("reports: agent " + std::to_string(i) +
                                      " reports unknown agent " + std::to_string(c));
            if (!std::binary_search(truth.begin(), truth.end(), c))
                throw ValidationError("reports: agent " + std::to_string(i) + " reports " +
                                      std::to_string(c) + " who is not a true child");
        }
        if (!reports.reported_preferences[i].is_permutation_of(inst.n))
            throw ValidationError("reports: preference of agent " + std::to_string(i) +
                                  " is not a permutation of all houses");
    }
}

/// The active market derived from an instance and a report profile:
/// participants (reachability closure from the organizer over reported edges)
/// plus relation oracles on the reported subgraph restricted to participants.
/// All sets are sorted agent lists; ancestors/descendants/siblings contain
/// agents only, while parents may contain the organizer.
struct Market {
    int n = 0;
    NetworkShape shape = NetworkShape::tree;
    std::vector<char> is_participant;              // [0..n]
    std::vector<AgentId> participants;             // sorted
    std::vector<std::vector<AgentId>> parents;     // may include organizer 0
    std::vector<std::vector<AgentId>> children;
    std::vector<std::vector<AgentId>> ancestors;   // agents only
    std::vector<std::vector<AgentId>> descendants;
    std::vector<std::vector<AgentId>> siblings;
    std::vector<char> organizer_child;             // i in reported r_o
    std::vector<int> depth;                        // BFS distance from organizer

    bool participates(AgentId i) const { return i >= 1 && i <= n && is_participant[i]; }

    void require_participant(AgentId i) const {
        if (!participates(i))
            throw ValidationError("agent " + std::to_string(i) + " is not in the market");
    }

    /// Root path set P_i = {i} plus all ancestors of i (tree semantics).
    std::vector<AgentId> root_path(AgentId i) const {
        require_participant(i);
        std::vector<AgentId> p = ancestors[i];
        p.push_back(i);
        std::sort(p.begin(), p.end());
        return p;
    }
};

inline Market build_market(const MarketInstance& inst, const ReportProfile& reports) {
    validate_instance(inst);
    validate_reports(inst, reports);

    const int n = inst.n;
    Market m;
    m.n = n;
    m.shape = inst.network.shape;

    // Reported edges: the organizer always invites all its children.
    std::vector<std::vector<AgentId>> rep_children(n + 1);
    rep_children[kOrganizer] = inst.network.children_of(kOrganizer);
    for (AgentId i = 1; i <= n; ++i) {
        rep_children[i] = reports.reported_children[i];
        std::sort(rep_children[i].begin(), rep_children[i].end());
    }

    // Participants: reachable from the organizer via at least one reported path.
    m.is_participant.assign(n + 1, 0);
    std::vector<AgentId> queue{kOrganizer};
    std::vector<char> visited(n + 1, 0);
    visited[kOrganizer] = 1;
    std::size_t head = 0;
    while (head < queue.size()) {
        AgentId u = queue[head++];
        for (AgentId c : rep_children[u])
            if (!visited[c]) {
                visited[c] = 1;
                m.is_participant[c] = 1;
                queue.push_back(c);
            }
    }
    for (AgentId i = 1; i <= n; ++i)
        if (m.is_participant[i]) m.participants.push_back(i);

    // Relation oracles on the reported subgraph restricted to participants.
    m.parents.assign(n + 1, {});
    m.children.assign(n + 1, {});
    m.ancestors.assign(n + 1, {});
    m.descendants.assign(n + 1, {});
    m.siblings.assign(n + 1, {});
    m.organizer_child.assign(n + 1, 0);
    m.depth.assign(n + 1, -1);

    for (AgentId u = 0; u <= n; ++u) {
        if (u != kOrganizer && !m.is_participant[u]) continue;
        for (AgentId c : rep_children[u]) {
            if (!m.is_participant[c]) continue;
            m.children[u].push_back(c);
            m.parents[c].push_back(u);
            if (u == kOrganizer) m.organizer_child[c] = 1;
        }
    }

    m.depth[kOrganizer] = 0;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        AgentId u = queue[q];
        for (AgentId c : m.children[u])
            if (m.depth[c] < 0) m.depth[c] = m.depth[u] + 1;
    }

    // Ancestor closure per agent (parents transitively, organizer excluded).
    for (AgentId i : m.participants) {
        std::vector<char> anc(n + 1, 0);
        std::vector<AgentId> stack(m.parents[i]);
        while (!stack.empty()) {
            AgentId p = stack.back();
            stack.pop_back();
            if (p == kOrganizer || anc[p]) continue;
            anc[p] = 1;
            for (AgentId pp : m.parents[p]) stack.push_back(pp);
        }
        for (AgentId a = 1; a <= n; ++a)
            if (anc[a]) m.ancestors[i].push_back(a);
    }
    for (AgentId i : m.participants)
        for (AgentId a : m.ancestors[i]) m.descendants[a].push_back(i);

    // Siblings: agents sharing at least one parent (the organizer counts).
    for (AgentId u = 0; u <= n; ++u) {
        const auto& cs = m.children[u];
        for (AgentId a : cs)
            for (AgentId b : cs)
                if (a != b) m.siblings[a].push_back(b);
    }
    for (AgentId i : m.participants) {
        auto& s = m.siblings[i];
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return m;
}

struct Relations {
    std::vector<AgentId> ancestors;
    std::vector<AgentId> descendants;
    std::vector<AgentId> siblings;
};

inline Relations relations(const Market& m, AgentId i) {
    m.require_participant(i);
    return Relations{m.ancestors[i], m.descendants[i], m.siblings[i]};
}

/// A bijection from participating agents onto their endowed houses.
/// assigned[i] == 0 means agent i is outside the market and keeps house i.
struct Allocation {
    int n = 0;
    std::vector<HouseId> assigned;  // [0..n], 0 = not in market

    Allocation() = default;
    explicit Allocation(int agents) : n(agents), assigned(agents + 1, 0) {}

    /// House agent i ends up holding (endowment when outside the market).
    HouseId held(AgentId i) const {
        HouseId h = assigned.at(i);
        return h == 0 ? i : h;
    }

    bool in_market(AgentId i) const { return assigned.at(i) != 0; }

    std::vector<AgentId> market_agents() const {
        std::vector<AgentId> out;
        for (AgentId i = 1; i <= n; ++i)
            if (assigned[i] != 0) out.push_back(i);
        return out;
    }
};

/// A bijection between the assigned agents and those same agents' endowments.
inline void validate_allocation(const Allocation& alloc) {
    std::vector<char> used(alloc.n + 1, 0);
    std::vector<char> member(alloc.n + 1, 0);
    for (AgentId i = 1; i <= alloc.n; ++i) {
        HouseId h = alloc.assigned[i];
        if (h == 0) continue;
        if (h < 1 || h > alloc.n || used[h])
            throw ValidationError("allocation: not a bijection (house " + std::to_string(h) + ")");
        used[h] = 1;
        member[i] = 1;
    }
    for (AgentId i = 1; i <= alloc.n; ++i)
        if (member[i] != used[i])
            throw ValidationError("allocation: assigned houses must be the members' endowments");
}

struct OutcomeMetrics {
    int swap_count = 0;
    std::vector<int> per_agent_improvement;  // [0..n], index 0 unused
    double average_improvement = 0.0;
};

/// Swap count and per-agent position improvements under the true preferences.
/// The average is taken over all n agents; non-participants contribute zero.
inline OutcomeMetrics metrics(const MarketInstance& inst, const Allocation& alloc) {
    if (alloc.n != inst.n) throw ValidationError("metrics: allocation size mismatch");
    validate_allocation(alloc);
    OutcomeMetrics out;
    out.per_agent_improvement.assign(inst.n + 1, 0);
    long long total = 0;
    for (AgentId i = 1; i <= inst.n; ++i) {
        HouseId h = alloc.held(i);
        if (h != i) ++out.swap_count;
        int improvement = rank(inst.pref(i), i) - rank(inst.pref(i), h);
        out.per_agent_improvement[i] = improvement;
        total += improvement;
    }
    out.average_improvement = static_cast<double>(total) / inst.n;
    return out;
}

}  // namespace netmatch
