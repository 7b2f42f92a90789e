#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netmatch/market.hpp"

/// The five matching mechanisms behind one interface: given a Market and the
/// reported preferences, produce an Allocation plus an auditable RunTrace.
namespace netmatch {

enum class Mechanism { classic_ttc, modified_ttc, leave_and_share, yrmh_igyt, ttcd };

struct MechanismId {
    Mechanism kind = Mechanism::classic_ttc;
    NetworkShape shape = NetworkShape::tree;
};

inline const char* to_string(Mechanism m) {
    switch (m) {
        case Mechanism::classic_ttc: return "classic_ttc";
        case Mechanism::modified_ttc: return "modified_ttc";
        case Mechanism::leave_and_share: return "leave_and_share";
        case Mechanism::yrmh_igyt: return "yrmh_igyt";
        case Mechanism::ttcd: return "ttcd";
    }
    return "?";
}

inline Mechanism parse_mechanism(const std::string& token) {
    for (Mechanism m : {Mechanism::classic_ttc, Mechanism::modified_ttc,
                        Mechanism::leave_and_share, Mechanism::yrmh_igyt, Mechanism::ttcd})
        if (token == to_string(m)) return m;
    throw ValidationError("unknown mechanism '" + token + "'");
}

inline const std::vector<Mechanism>& all_mechanisms() {
    static const std::vector<Mechanism> all{
        Mechanism::classic_ttc, Mechanism::modified_ttc, Mechanism::leave_and_share,
        Mechanism::yrmh_igyt, Mechanism::ttcd};
    return all;
}

/// One conflict resolution applied while pointers settle.
struct ConflictRecord {
    enum class Rule {
        ancestor_house,    // contested house belongs to an ancestor of i (or to i): j yields
        descendant_house,  // contested house belongs to a descendant of j: i yields
        sibling_between,   // graph rule: j is also i's sibling, k between them: j yields
    };
    AgentId i = 0;
    AgentId j = 0;
    HouseId house = 0;
    Rule rule = Rule::ancestor_house;
    AgentId excluded_agent = 0;
};

/// A chain adjudication: the contested-house owner k builds a demand chain
/// whose closing cycle trades immediately.
struct ChainRecord {
    AgentId i = 0;
    AgentId j = 0;
    AgentId k = 0;
    std::vector<AgentId> chain;
    std::vector<AgentId> committed_cycle;
    bool cycle_contains_start = false;
};

struct RoundTrace {
    std::vector<std::pair<AgentId, HouseId>> pointers;  // after base pointing
    std::vector<ConflictRecord> conflicts;
    std::vector<ChainRecord> chains;
    std::vector<std::vector<AgentId>> removed_cycles;   // committed + harvested
};

struct RunTrace {
    std::vector<RoundTrace> rounds;
};

struct MechanismResult {
    Allocation allocation;
    RunTrace trace;
};

namespace detail {

/// Walk the out-degree-1 pointer graph and collect every cycle, ascending
/// from the smallest unvisited agent; disjoint by construction.
inline std::vector<std::vector<AgentId>> collect_cycles(
    int n, const std::vector<char>& remaining, const std::vector<AgentId>& points_to) {
    std::vector<std::vector<AgentId>> cycles;
    std::vector<int> state(n + 1, 0);  // 0 unseen, 1 on current walk, 2 done
    for (AgentId start = 1; start <= n; ++start) {
        if (!remaining[start] || state[start] != 0) continue;
        std::vector<AgentId> walk;
        AgentId cur = start;
        while (state[cur] == 0) {
            state[cur] = 1;
            walk.push_back(cur);
            cur = points_to[cur];
        }
        if (state[cur] == 1) {
            auto it = std::find(walk.begin(), walk.end(), cur);
            cycles.emplace_back(it, walk.end());
        }
        for (AgentId a : walk) state[a] = 2;
    }
    return cycles;
}

/// Shared round loop for the simultaneous-pointing mechanisms: every remaining
/// agent points at its top remaining house within a static eligibility list,
/// all cycles trade and leave, repeat. `eligible_owners(i)` fixes whose houses
/// agent i may ever demand (own house always added).
template <typename EligibleOwners>
inline MechanismResult pointing_rounds(const Market& m, const std::vector<PreferenceOrder>& prefs,
                                       EligibleOwners&& eligible_owners) {
    const int n = m.n;
    std::vector<char> remaining(n + 1, 0);
    for (AgentId i : m.participants) remaining[i] = 1;
    int nrem = static_cast<int>(m.participants.size());
    Allocation alloc(n);

    std::vector<std::vector<HouseId>> elig(n + 1);
    for (AgentId i : m.participants) {
        std::vector<char> ok(n + 1, 0);
        for (AgentId a : eligible_owners(i)) ok[a] = 1;
        ok[i] = 1;
        for (HouseId h : prefs.at(i).ranking)
            if (ok[h]) elig[i].push_back(h);
    }
    const auto point = [&](AgentId i) {
        for (HouseId h : elig[i])
            if (remaining[h]) return h;
        throw std::logic_error("pointer lost its own house");  // unreachable
    };

    RunTrace trace;
    while (nrem > 0) {
        RoundTrace round;
        std::vector<AgentId> target(n + 1, 0);
        for (AgentId i : m.participants)
            if (remaining[i]) {
                target[i] = point(i);
                round.pointers.emplace_back(i, target[i]);
            }
        auto cycles = collect_cycles(n, remaining, target);
        for (const auto& cycle : cycles) {
            for (AgentId a : cycle) {
                alloc.assigned[a] = target[a];
                remaining[a] = 0;
                --nrem;
            }
            round.removed_cycles.push_back(cycle);
        }
        trace.rounds.push_back(std::move(round));
    }
    return MechanismResult{alloc, std::move(trace)};
}

/// Shared skeleton for Leave-and-Share and YRMH-IGYT: pick the remaining agent
/// closest to the organizer, grow a pointing chain until it closes, trade that
/// cycle out, then contract the network so the leavers' neighbours reconnect.
class SequentialRounds {
public:
    enum class Eligibility { neighbours, ancestors_and_children };

    SequentialRounds(const Market& market, const std::vector<PreferenceOrder>& prefs,
                     Eligibility elig)
        : m_(market), prefs_(prefs), mode_(elig), remaining_(market.n + 1, 0),
          adj_(market.n + 1, std::vector<char>(market.n + 1, 0)), alloc_(market.n) {
        for (AgentId i : m_.participants) remaining_[i] = 1;
        nrem_ = static_cast<int>(m_.participants.size());
        for (AgentId u = 0; u <= m_.n; ++u)
            for (AgentId c : m_.children[u]) {
                adj_[u][c] = 1;
                adj_[c][u] = 1;
            }
    }

    MechanismResult run() {
        RunTrace trace;
        while (nrem_ > 0) {
            RoundTrace round;
            auto dist = distances();
            AgentId start = 0;
            for (AgentId i = 1; i <= m_.n; ++i)
                if (remaining_[i] && (start == 0 || dist[i] < dist[start])) start = i;

            std::vector<AgentId> chain;
            std::vector<int> pos(m_.n + 1, -1);
            std::vector<HouseId> choice(m_.n + 1, 0);
            AgentId cur = start;
            std::vector<AgentId> cycle;
            while (true) {
                pos[cur] = static_cast<int>(chain.size());
                chain.push_back(cur);
                choice[cur] = point(cur, dist);
                round.pointers.emplace_back(cur, choice[cur]);
                AgentId next = choice[cur];  // house id == owner id
                if (pos[next] >= 0) {
                    cycle.assign(chain.begin() + pos[next], chain.end());
                    break;
                }
                cur = next;
            }
            for (AgentId a : cycle) {
                alloc_.assigned[a] = choice[a];
                remaining_[a] = 0;
                --nrem_;
            }
            round.removed_cycles.push_back(cycle);
            contract(cycle);
            trace.rounds.push_back(std::move(round));
        }
        return MechanismResult{alloc_, std::move(trace)};
    }

private:
    std::vector<int> distances() const {
        std::vector<int> dist(m_.n + 1, -1);
        std::vector<AgentId> queue{kOrganizer};
        dist[kOrganizer] = 0;
        std::size_t head = 0;
        while (head < queue.size()) {
            AgentId u = queue[head++];
            for (AgentId v = 0; v <= m_.n; ++v)
                if (adj_[u][v] && dist[v] < 0 && (v == kOrganizer || remaining_[v])) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
        }
        return dist;
    }

    /// Orientation on the contracted graph comes from the organizer distance:
    /// a neighbour one level up is a parent, one level down a child. Links
    /// between same-level neighbours stay dormant until later removals tilt
    /// them into a parent-child drop.
    HouseId point(AgentId i, const std::vector<int>& dist) const {
        std::vector<char> ok(m_.n + 1, 0);
        ok[i] = 1;
        if (mode_ == Eligibility::neighbours) {
            for (AgentId v = 1; v <= m_.n; ++v)
                if (remaining_[v] && adj_[i][v] && std::abs(dist[v] - dist[i]) == 1) ok[v] = 1;
        } else {
            for (AgentId v = 1; v <= m_.n; ++v)
                if (remaining_[v] && adj_[i][v] && dist[v] == dist[i] + 1) ok[v] = 1;  // children
            // Ancestors: transitive closure of the parent orientation.
            std::vector<char> seen(m_.n + 1, 0);
            std::vector<AgentId> stack{i};
            seen[i] = 1;
            while (!stack.empty()) {
                AgentId u = stack.back();
                stack.pop_back();
                for (AgentId v = 1; v <= m_.n; ++v)
                    if (remaining_[v] && adj_[u][v] && dist[v] == dist[u] - 1 && !seen[v]) {
                        seen[v] = 1;
                        ok[v] = 1;
                        stack.push_back(v);
                    }
            }
        }
        for (HouseId h : prefs_.at(i).ranking)
            if (ok[h]) return h;
        throw std::logic_error("pointer lost its own house");  // unreachable
    }

    /// Remaining neighbours of the removed set become pairwise connected:
    /// any two survivors linked by a path running through removed agents only.
    void contract(const std::vector<AgentId>& removed) {
        std::vector<char> gone(m_.n + 1, 0);
        for (AgentId a : removed) gone[a] = 1;
        std::vector<char> seen(m_.n + 1, 0);
        for (AgentId a : removed) {
            if (seen[a]) continue;
            std::vector<AgentId> component, frontier{a};
            seen[a] = 1;
            std::vector<AgentId> border;
            while (!frontier.empty()) {
                AgentId u = frontier.back();
                frontier.pop_back();
                component.push_back(u);
                for (AgentId v = 0; v <= m_.n; ++v) {
                    if (!adj_[u][v]) continue;
                    if (gone[v]) {
                        if (!seen[v]) {
                            seen[v] = 1;
                            frontier.push_back(v);
                        }
                    } else if (v == kOrganizer || remaining_[v]) {
                        border.push_back(v);
                    }
                }
            }
            std::sort(border.begin(), border.end());
            border.erase(std::unique(border.begin(), border.end()), border.end());
            for (AgentId u : border)
                for (AgentId v : border)
                    if (u != v) adj_[u][v] = 1;
        }
        for (AgentId a : removed)
            for (AgentId v = 0; v <= m_.n; ++v) adj_[a][v] = adj_[v][a] = 0;
    }

    const Market& m_;
    const std::vector<PreferenceOrder>& prefs_;
    Eligibility mode_;
    std::vector<char> remaining_;
    int nrem_ = 0;
    std::vector<std::vector<char>> adj_;  // symmetric, organizer included
    Allocation alloc_;
};

}  // namespace detail

/// Pointer state of one TTCD round: every remaining agent's current target
/// plus the houses barred for it by this round's conflict resolutions.
struct PointerState {
    std::vector<HouseId> target;               // [0..n], 0 = removed/absent
    std::vector<std::vector<char>> excluded;   // [agent][house]
};

/// Round engine for Top Trading Cycle with Diffusion.
///
/// Each round: (a) base pointing — organizer children target their best house
/// among remaining siblings/self/descendants, everyone else among remaining
/// ancestors/self/descendants (on graphs an organizer child with ancestors
/// gets the union); (b) inviter–invitee conflicts are resolved to fixpoint;
/// (c) all pointer cycles trade and leave. Chain adjudications inside (b)
/// commit their closing cycle immediately and pointing restarts.
///
/// `graph_amendments` enables the two graph-network rules: the ancestor-house
/// rule is skipped when j is a sibling of the house owner, and a competitor
/// that is both sibling and descendant of i yields when the house owner lies
/// between them.
class TtcdEngine {
public:
    TtcdEngine(const Market& market, const std::vector<PreferenceOrder>& prefs,
               bool graph_amendments)
        : m_(market), graph_rules_(graph_amendments), remaining_(market.n + 1, 0),
          is_anc_(market.n + 1, std::vector<char>(market.n + 1, 0)),
          is_desc_(market.n + 1, std::vector<char>(market.n + 1, 0)),
          is_sib_(market.n + 1, std::vector<char>(market.n + 1, 0)), alloc_(market.n) {
        for (AgentId i : m_.participants) remaining_[i] = 1;
        nrem_ = static_cast<int>(m_.participants.size());
        for (AgentId i : m_.participants) {
            for (AgentId a : m_.ancestors[i]) is_anc_[i][a] = 1;
            for (AgentId d : m_.descendants[i]) is_desc_[i][d] = 1;
            for (AgentId s : m_.siblings[i]) is_sib_[i][s] = 1;
        }
        elig_.assign(m_.n + 1, {});
        for (AgentId i : m_.participants) {
            std::vector<char> ok(m_.n + 1, 0);
            ok[i] = 1;
            for (AgentId a : m_.ancestors[i]) ok[a] = 1;
            for (AgentId d : m_.descendants[i]) ok[d] = 1;
            if (m_.organizer_child[i])
                for (AgentId s : m_.siblings[i]) ok[s] = 1;
            for (HouseId h : prefs.at(i).ranking)
                if (ok[h]) elig_[i].push_back(h);
        }
        state_.target.assign(m_.n + 1, 0);
        state_.excluded.assign(m_.n + 1, std::vector<char>(m_.n + 1, 0));
    }

    bool finished() const { return nrem_ == 0; }

    /// (a): reset exclusions, point everyone.
    void start_round() {
        round_ = RoundTrace{};
        for (AgentId i = 1; i <= m_.n; ++i)
            std::fill(state_.excluded[i].begin(), state_.excluded[i].end(), 0);
        repoint_all();
        for (AgentId i = 1; i <= m_.n; ++i)
            if (remaining_[i]) round_.pointers.emplace_back(i, state_.target[i]);
    }

    /// (b): apply the conflict rules until no inviter-invitee pair contests
    /// the same house under a resolvable configuration.
    void resolve_conflicts() {
        while (true) {
            auto conflict = scan_for_conflict();
            if (!conflict) break;
            const auto [i, j, k, kind] = *conflict;
            switch (kind) {
                case Conflict::Kind::ancestor_house:
                    exclude_and_repoint(j, k, {i, j, k, ConflictRecord::Rule::ancestor_house, j});
                    break;
                case Conflict::Kind::descendant_house:
                    exclude_and_repoint(i, k, {i, j, k, ConflictRecord::Rule::descendant_house, i});
                    break;
                case Conflict::Kind::sibling_between:
                    exclude_and_repoint(j, k, {i, j, k, ConflictRecord::Rule::sibling_between, j});
                    break;
                case Conflict::Kind::chain:
                    adjudicate_chain(i, j, k);
                    break;
            }
        }
    }

    /// (c): every cycle in the settled pointer graph trades and leaves.
    void harvest() {
        auto cycles = detail::collect_cycles(m_.n, remaining_, state_.target);
        for (const auto& cycle : cycles) remove_cycle(cycle);
        trace_.rounds.push_back(std::move(round_));
    }

    MechanismResult run() {
        while (!finished()) {
            start_round();
            resolve_conflicts();
            harvest();
        }
        return MechanismResult{alloc_, trace_};
    }

    const PointerState& state() const { return state_; }
    const RoundTrace& current_round() const { return round_; }
    const Allocation& allocation() const { return alloc_; }
    bool remaining(AgentId i) const { return remaining_[i]; }

private:
    struct Conflict {
        AgentId i, j, k;
        enum class Kind { ancestor_house, descendant_house, sibling_between, chain } kind;
    };

    /// First pair (i, j in descendants(i)) contesting one house under a
    /// resolvable configuration, in (depth of i, i, j) order. The chain kind
    /// covers a contested house owned by a descendant of i that is not a
    /// descendant of j.
    std::optional<Conflict> scan_for_conflict() const {
        std::vector<AgentId> order;
        for (AgentId i = 1; i <= m_.n; ++i)
            if (remaining_[i]) order.push_back(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](AgentId a, AgentId b) { return m_.depth[a] < m_.depth[b]; });
        for (AgentId i : order) {
            for (AgentId j : m_.descendants[i]) {
                if (!remaining_[j] || state_.target[i] != state_.target[j]) continue;
                const AgentId k = state_.target[i];  // house id == owner id
                if (k == i || is_anc_[i][k]) {
                    if (graph_rules_ && is_sib_[k][j]) continue;  // siblings may compete
                    return Conflict{i, j, k, Conflict::Kind::ancestor_house};
                }
                if (is_desc_[j][k]) return Conflict{i, j, k, Conflict::Kind::descendant_house};
                if (is_desc_[i][k]) {
                    if (graph_rules_ && is_sib_[i][j] && is_anc_[j][k])
                        return Conflict{i, j, k, Conflict::Kind::sibling_between};
                    return Conflict{i, j, k, Conflict::Kind::chain};
                }
                // Owner unrelated to the pair: left to ordinary cycle formation.
            }
        }
        return std::nullopt;
    }

    void exclude_and_repoint(AgentId loser, HouseId house, ConflictRecord record) {
        state_.excluded[loser][house] = 1;
        state_.target[loser] = point(loser);
        round_.conflicts.push_back(record);
    }

    /// The owner k of the contested house builds a demand chain. Strict
    /// ancestors of i may only demand within {i} + ancestors(i); strict
    /// descendants of j only within {j} + descendants(j); k, i, j and
    /// unrelated agents demand by base eligibility. The closing cycle trades
    /// immediately; if it swallowed the contested house, whichever of i, j is
    /// left out is barred from it.
    void adjudicate_chain(AgentId i, AgentId j, AgentId k) {
        ChainRecord rec;
        rec.i = i;
        rec.j = j;
        rec.k = k;
        std::vector<int> pos(m_.n + 1, -1);
        std::vector<HouseId> choice(m_.n + 1, 0);
        AgentId cur = k;
        std::vector<AgentId> cycle;
        while (true) {
            pos[cur] = static_cast<int>(rec.chain.size());
            rec.chain.push_back(cur);
            choice[cur] = chain_choice(cur, i, j);
            AgentId next = choice[cur];
            if (pos[next] >= 0) {
                cycle.assign(rec.chain.begin() + pos[next], rec.chain.end());
                rec.cycle_contains_start = (pos[next] == 0);
                break;
            }
            cur = next;
        }
        for (AgentId a : cycle) state_.target[a] = choice[a];
        remove_cycle(cycle);
        rec.committed_cycle = cycle;
        if (rec.cycle_contains_start) {
            for (AgentId a : {i, j})
                if (remaining_[a]) state_.excluded[a][k] = 1;
        }
        repoint_all();
        round_.chains.push_back(std::move(rec));
    }

    HouseId chain_choice(AgentId x, AgentId i, AgentId j) const {
        if (x != i && x != j) {
            if (is_anc_[i][x]) return point_within(x, i, is_anc_[i]);
            if (is_desc_[j][x]) return point_within(x, j, is_desc_[j]);
        }
        return point(x);
    }

    HouseId point_within(AgentId x, AgentId anchor, const std::vector<char>& cls) const {
        for (HouseId h : elig_[x])
            if (remaining_[h] && !state_.excluded[x][h] && (h == anchor || cls[h])) return h;
        throw std::logic_error("chain override emptied an agent's choice set");
    }

    HouseId point(AgentId x) const {
        for (HouseId h : elig_[x])
            if (remaining_[h] && !state_.excluded[x][h]) return h;
        throw std::logic_error("pointer lost its own house");  // own house never excluded
    }

    void repoint_all() {
        for (AgentId a = 1; a <= m_.n; ++a)
            state_.target[a] = remaining_[a] ? point(a) : 0;
    }

    void remove_cycle(const std::vector<AgentId>& cycle) {
        for (AgentId a : cycle) {
            alloc_.assigned[a] = state_.target[a];
            remaining_[a] = 0;
            state_.target[a] = 0;
            --nrem_;
        }
        round_.removed_cycles.push_back(cycle);
    }

    const Market& m_;
    bool graph_rules_;
    std::vector<char> remaining_;
    int nrem_ = 0;
    std::vector<std::vector<char>> is_anc_, is_desc_, is_sib_;
    std::vector<std::vector<HouseId>> elig_;
    PointerState state_;
    Allocation alloc_;
    RoundTrace round_;
    RunTrace trace_;
};

inline MechanismResult classic_ttc_run(const Market& m, const std::vector<PreferenceOrder>& prefs) {
    return detail::pointing_rounds(m, prefs, [&](AgentId) { return m.participants; });
}

inline MechanismResult modified_ttc_run(const Market& m, const std::vector<PreferenceOrder>& prefs) {
    return detail::pointing_rounds(m, prefs, [&](AgentId i) {
        std::vector<AgentId> out;
        for (AgentId p : m.parents[i])
            if (p != kOrganizer) out.push_back(p);
        out.insert(out.end(), m.descendants[i].begin(), m.descendants[i].end());
        return out;
    });
}

inline MechanismResult leave_and_share_run(const Market& m,
                                           const std::vector<PreferenceOrder>& prefs) {
    return detail::SequentialRounds(m, prefs, detail::SequentialRounds::Eligibility::neighbours)
        .run();
}

inline MechanismResult yrmh_igyt_run(const Market& m, const std::vector<PreferenceOrder>& prefs) {
    return detail::SequentialRounds(m, prefs,
                                    detail::SequentialRounds::Eligibility::ancestors_and_children)
        .run();
}

/// TTCD with an explicit rule set; tests use this to run the tree rules on a
/// graph-shaped market.
inline MechanismResult ttcd_run(const Market& m, const std::vector<PreferenceOrder>& prefs,
                                bool graph_amendments) {
    return TtcdEngine(m, prefs, graph_amendments).run();
}

inline MechanismResult ttcd_tree_run(const Market& m, const std::vector<PreferenceOrder>& prefs) {
    if (m.shape != NetworkShape::tree)
        throw ValidationError("ttcd tree rules require a tree-shaped market");
    return ttcd_run(m, prefs, false);
}

inline MechanismResult ttcd_graph_run(const Market& m, const std::vector<PreferenceOrder>& prefs) {
    return ttcd_run(m, prefs, true);
}

/// Single entry point: deterministic allocation over the market participants
/// plus the trace that reconstructs it. All five mechanisms run on both
/// shapes; ttcd dispatches its rule set by the shape flag.
inline MechanismResult run(MechanismId id, const Market& m,
                           const std::vector<PreferenceOrder>& prefs) {
    switch (id.kind) {
        case Mechanism::classic_ttc: return classic_ttc_run(m, prefs);
        case Mechanism::modified_ttc: return modified_ttc_run(m, prefs);
        case Mechanism::leave_and_share: return leave_and_share_run(m, prefs);
        case Mechanism::yrmh_igyt: return yrmh_igyt_run(m, prefs);
        case Mechanism::ttcd:
            return id.shape == NetworkShape::graph ? ttcd_graph_run(m, prefs)
                                                   : ttcd_tree_run(m, prefs);
    }
    throw ValidationError("unknown mechanism id");
}

/// Convenience wrapper: build the market from instance + reports and run.
inline MechanismResult run_on(Mechanism kind, const MarketInstance& inst,
                              const ReportProfile& reports) {
    Market m = build_market(inst, reports);
    return run(MechanismId{kind, inst.network.shape}, m, reports.reported_preferences);
}

inline MechanismResult run_truthful(Mechanism kind, const MarketInstance& inst) {
    return run_on(kind, inst, ReportProfile::truthful(inst));
}

}  // namespace netmatch
