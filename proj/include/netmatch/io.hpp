#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netmatch/market.hpp"

/// Instance and report files: a restricted JSON object with keys n, shape,
/// edges and preferences, canonicalized with sorted keys, sorted edges and no
/// insignificant whitespace. Houses are written as their owner ids.
namespace netmatch {

namespace io_detail {

inline nlohmann::json parse_json(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
}

inline void check_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                       const char* what) {
    if (!obj.is_object()) throw ValidationError(std::string(what) + ": top level must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ValidationError(std::string(what) + ": unknown key '" + it.key() + "'");
}

inline int to_id(const nlohmann::json& v, const char* what) {
    if (!v.is_number_integer())
        throw ValidationError(std::string(what) + ": expected an integer id");
    return v.get<int>();
}

}  // namespace io_detail

inline MarketInstance parse_instance(const std::string& text) {
    using nlohmann::json;
    const json j = io_detail::parse_json(text, "instance");
    io_detail::check_keys(j, {"n", "shape", "edges", "preferences"}, "instance");
    for (const char* key : {"n", "shape", "edges", "preferences"})
        if (!j.contains(key))
            throw ValidationError(std::string("instance: missing key '") + key + "'");

    MarketInstance inst;
    inst.n = io_detail::to_id(j["n"], "instance n");
    if (inst.n < 1) throw ValidationError("instance: n must be at least 1");

    const std::string shape = j["shape"].is_string() ? j["shape"].get<std::string>() : "";
    if (shape == "tree") inst.network.shape = NetworkShape::tree;
    else if (shape == "graph") inst.network.shape = NetworkShape::graph;
    else throw ValidationError("instance: shape must be \"tree\" or \"graph\"");

    inst.network.n = inst.n;
    if (!j["edges"].is_array()) throw ValidationError("instance: edges must be an array");
    for (const auto& e : j["edges"]) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError("instance: each edge must be a [parent, child] pair");
        inst.network.edges.emplace_back(io_detail::to_id(e[0], "edge parent"),
                                        io_detail::to_id(e[1], "edge child"));
    }

    if (!j["preferences"].is_array() || static_cast<int>(j["preferences"].size()) != inst.n)
        throw ValidationError("instance: preferences must list one ranking per agent 1..n");
    inst.true_preferences.resize(inst.n + 1);
    for (AgentId i = 1; i <= inst.n; ++i) {
        const auto& row = j["preferences"][i - 1];
        if (!row.is_array())
            throw ValidationError("instance: preference of agent " + std::to_string(i) +
                                  " must be an array");
        std::vector<HouseId> order;
        for (const auto& h : row) order.push_back(io_detail::to_id(h, "preference entry"));
        inst.true_preferences[i] = PreferenceOrder{std::move(order)};
    }
    validate_instance(inst);
    return inst;
}

/// Canonical form: sorted keys, edges sorted ascending, no insignificant
/// whitespace, one trailing newline. parse/serialize round-trips are
/// byte-stable on canonical input.
inline std::string serialize_instance(const MarketInstance& inst) {
    using nlohmann::json;
    json j;
    j["n"] = inst.n;
    j["shape"] = to_string(inst.network.shape);
    auto edges = inst.network.edges;
    std::sort(edges.begin(), edges.end());
    json je = json::array();
    for (const auto& [p, c] : edges) je.push_back(json::array({p, c}));
    j["edges"] = std::move(je);
    json jp = json::array();
    for (AgentId i = 1; i <= inst.n; ++i) jp.push_back(inst.true_preferences[i].ranking);
    j["preferences"] = std::move(jp);
    return j.dump() + "\n";
}

/// Sparse overrides on top of truthful reports: optional "children" and
/// "preferences" objects keyed by agent id. The organizer's invitations are
/// not reportable.
inline ReportProfile parse_report(const std::string& text, const MarketInstance& inst) {
    using nlohmann::json;
    const json j = io_detail::parse_json(text, "report");
    io_detail::check_keys(j, {"children", "preferences"}, "report");

    ReportProfile reports = ReportProfile::truthful(inst);
    const auto agent_key = [&](const std::string& key) -> AgentId {
        AgentId a;
        try {
            std::size_t used = 0;
            a = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ValidationError("report: bad agent key '" + key + "'");
        }
        if (a == kOrganizer)
            throw ValidationError("report: the organizer's invitations cannot be pruned");
        if (a < 1 || a > inst.n)
            throw ValidationError("report: unknown agent " + key);
        return a;
    };

    if (j.contains("children")) {
        if (!j["children"].is_object())
            throw ValidationError("report: children must be an object keyed by agent id");
        for (auto it = j["children"].begin(); it != j["children"].end(); ++it) {
            AgentId a = agent_key(it.key());
            if (!it.value().is_array())
                throw ValidationError("report: children of agent " + it.key() +
                                      " must be an array");
            std::vector<AgentId> kids;
            for (const auto& c : it.value()) kids.push_back(io_detail::to_id(c, "reported child"));
            std::sort(kids.begin(), kids.end());
            reports.reported_children[a] = std::move(kids);
        }
    }
    if (j.contains("preferences")) {
        if (!j["preferences"].is_object())
            throw ValidationError("report: preferences must be an object keyed by agent id");
        for (auto it = j["preferences"].begin(); it != j["preferences"].end(); ++it) {
            AgentId a = agent_key(it.key());
            if (!it.value().is_array())
                throw ValidationError("report: preference of agent " + it.key() +
                                      " must be an array");
            std::vector<HouseId> order;
            for (const auto& h : it.value()) order.push_back(io_detail::to_id(h, "reported house"));
            reports.reported_preferences[a] = PreferenceOrder{std::move(order)};
        }
    }
    validate_reports(inst, reports);
    return reports;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << content;
}

inline MarketInstance load_instance(const std::string& path) {
    return parse_instance(read_file(path));
}

}  // namespace netmatch
