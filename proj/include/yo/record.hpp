#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "yo/objectives.hpp"
#include "yo/search_space.hpp"

namespace yo {

enum class EventKind { Accept, Reject, Reheat, BlacklistAdd, BlacklistHit };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Accept: return "accept";
        case EventKind::Reject: return "reject";
        case EventKind::Reheat: return "reheat";
        case EventKind::BlacklistAdd: return "blacklist_add";
        case EventKind::BlacklistHit: return "blacklist_hit";
    }
    return "?";
}

inline const char* to_string(Phase p) { return p == Phase::BurnIn ? "burn_in" : "hybrid"; }

/// Per-chain log entry. old_t/new_t are only meaningful for Reheat.
struct Event {
    EventKind kind = EventKind::Accept;
    Phase phase = Phase::Hybrid;
    std::size_t iteration = 0;
    double old_t = 0.0;
    double new_t = 0.0;
};

/// (1-based global evaluation index, best value so far)
using TracePoint = std::pair<std::size_t, double>;

/// One optimizer run.
template <class Point>
struct RunRecord {
    std::string algorithm;
    Candidate<Point> best;
    double best_value = 0.0;
    std::vector<TracePoint> trace;
    std::optional<double> wall_time_ms;
    std::size_t evaluations_used = 0;
    std::vector<std::vector<Event>> chain_events;
    nlohmann::ordered_json config_echo = nlohmann::ordered_json::object();
    /// Temperature each chain ended with (YO only; used to audit the event log).
    std::vector<double> final_temperatures;
    double t0 = 0.0;
    std::size_t blacklist_additions = 0;
    std::size_t blacklist_hits = 0;
};

/// Collapses improvement points from any number of sources into one
/// non-increasing best-so-far step curve, closed at `evaluations_used`.
inline std::vector<TracePoint> merge_trace(std::vector<TracePoint> points, std::size_t evaluations_used) {
    std::sort(points.begin(), points.end());
    std::vector<TracePoint> out;
    for (const auto& p : points)
        if (out.empty() || p.second < out.back().second) out.push_back(p);
    if (!out.empty() && out.back().first < evaluations_used) out.emplace_back(evaluations_used, out.back().second);
    return out;
}

/// Tracks the best value seen by a single-threaded optimizer and records
/// a trace point whenever it improves.
template <class Point>
struct BestTracker {
    Candidate<Point> best;
    std::vector<TracePoint> improvements;

    void observe(std::size_t eval_index, const Point& x, double value) {
        if (!best.value || value < *best.value) {
            best = {x, value};
            improvements.emplace_back(eval_index, value);
        }
    }
};

}  // namespace yo
