#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "yo/record.hpp"

namespace yo {

struct JsonOptions {
    /// Emit the measured wall time. Off by default so that identical
    /// configurations serialize to identical bytes; wall_time_ms is then null.
    bool include_timing = false;
    /// Include burn-in/hybrid accept and reject events, not only reheats
    /// and blacklist activity.
    bool include_all_events = true;
};

template <class Point>
nlohmann::ordered_json to_json(const RunRecord<Point>& rec, const JsonOptions& opt = {}) {
    using json = nlohmann::ordered_json;
    json j;
    j["algorithm"] = rec.algorithm;
    j["best_value"] = rec.best_value;
    j["best_position"] = rec.best.position;
    j["evaluations_used"] = rec.evaluations_used;
    json trace = json::array();
    for (const auto& [i, v] : rec.trace) trace.push_back(json::array({i, v}));
    j["trace"] = std::move(trace);
    json events = json::array();
    for (const auto& chain : rec.chain_events) {
        json list = json::array();
        for (const auto& e : chain) {
            if (!opt.include_all_events && (e.kind == EventKind::Accept || e.kind == EventKind::Reject)) continue;
            json ev;
            ev["kind"] = to_string(e.kind);
            ev["phase"] = to_string(e.phase);
            ev["iteration"] = e.iteration;
            if (e.kind == EventKind::Reheat) {
                ev["old_t"] = e.old_t;
                ev["new_t"] = e.new_t;
            }
            list.push_back(std::move(ev));
        }
        events.push_back(std::move(list));
    }
    j["events"] = std::move(events);
    j["t0"] = rec.t0;
    j["final_temperatures"] = rec.final_temperatures;
    j["blacklist_additions"] = rec.blacklist_additions;
    j["blacklist_hits"] = rec.blacklist_hits;
    j["config_echo"] = rec.config_echo;
    j["wall_time_ms"] = (opt.include_timing && rec.wall_time_ms) ? json(*rec.wall_time_ms) : json(nullptr);
    return j;
}

template <class Point>
std::string to_json_string(const RunRecord<Point>& rec, const JsonOptions& opt = {}) {
    return to_json(rec, opt).dump(1) + "\n";
}

/// Trace as CSV with header `eval,best`.
template <class Point>
void write_trace_csv(std::ostream& os, const RunRecord<Point>& rec) {
    os.precision(17);
    os << "eval,best\n";
    for (const auto& [i, v] : rec.trace) os << i << ',' << v << '\n';
}

}  // namespace yo
