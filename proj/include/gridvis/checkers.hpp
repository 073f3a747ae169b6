#pragma once

// Ground-truth verification: complete-visibility predicates, trace replay
// auditing and final metrics. Everything here recomputes from scratch and
// never trusts simulator bookkeeping.

#include <string>
#include <vector>

#include "gridvis/algorithm.hpp"
#include "gridvis/geometry.hpp"
#include "gridvis/sim.hpp"

namespace gridvis {

// Definition 1: every pair of robots is mutually visible (no third robot
// strictly inside their segment).
inline bool complete_visibility(const Configuration& config) {
    for (std::size_t i = 0; i < config.robots.size(); ++i)
        for (std::size_t j = i + 1; j < config.robots.size(); ++j)
            for (const auto& r : config.robots)
                if (blocks(config.robots[i].pos, config.robots[j].pos, r.pos)) return false;
    return true;
}

// Definition 2: no three robots are collinear. Stronger phrasing of the same
// property for point obstacles; the test suite checks the equivalence.
inline bool no_three_collinear(const Configuration& config) {
    const auto& rs = config.robots;
    for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j)
            for (std::size_t k = j + 1; k < rs.size(); ++k)
                if (collinear(rs[i].pos, rs[j].pos, rs[k].pos)) return false;
    return true;
}

struct FinalMetrics {
    std::int64_t rounds = 0;
    std::int64_t area = 0;
    std::int64_t diameter0 = 0;
    std::size_t moves = 0;
    std::size_t conflicts = 0;
    Milestone milestone = Milestone::None;
    bool completeVisibility = false;
};

inline FinalMetrics final_metrics(const Trace& trace) {
    FinalMetrics m;
    m.rounds = trace.rounds;
    m.area = bounding_area(trace.final_);
    m.diameter0 = diameter(trace.initial);
    for (const auto& ev : trace.events) {
        if (ev.kind != EventKind::Move) continue;
        if (ev.aborted)
            ++m.conflicts;
        else
            ++m.moves;
    }
    m.milestone = classify(trace.final_);
    m.completeVisibility = complete_visibility(trace.final_);
    return m;
}

struct AuditReport {
    std::vector<ViolationRecord> violations;
    Configuration finalConfig;
    bool clean() const {
        for (const auto& v : violations)
            if (v.kind != ViolationKind::ConflictAbort) return false;
        return true;
    }
};

// Replays a trace event by event through a fresh World and re-derives every
// recorded field. Any divergence between the record and the replay, and any
// model invariant broken along the way, becomes a ViolationRecord.
inline AuditReport audit_trace(const Trace& trace, const RuleSet& ruleset) {
    AuditReport report;
    if (trace.rulesetHash != ruleset_hash(ruleset))
        report.violations.push_back(
            {0, ViolationKind::IllegalRecolor, "trace was recorded under a different rule set"});

    World world(trace.initial, ruleset);
    std::map<RobotId, std::size_t> indexOf;
    for (std::size_t i = 0; i < trace.initial.size(); ++i)
        indexOf[trace.initial.robots[i].id] = i;

    for (std::size_t step = 0; step < trace.events.size(); ++step) {
        const TraceEvent& recorded = trace.events[step];
        auto it = indexOf.find(recorded.robot);
        if (it == indexOf.end()) {
            report.violations.push_back({step, ViolationKind::Occupancy,
                                         "event names unknown robot " +
                                             std::to_string(recorded.robot)});
            break;
        }
        std::size_t idx = it->second;
        if (world.next_kind(idx) != recorded.kind) {
            report.violations.push_back({step, ViolationKind::NonUnitMove,
                                         "robot " + std::to_string(recorded.robot) +
                                             " event out of cycle order"});
            break;
        }
        Point before = world.config().robots[idx].pos;
        TraceEvent replayed = world.apply(idx, step);
        Point after = world.config().robots[idx].pos;
        Point d = after - before;
        if (std::abs(d.x) + std::abs(d.y) > 1)
            report.violations.push_back({step, ViolationKind::NonUnitMove,
                                         "robot moved more than one cell"});
        if (replayed != recorded) {
            ViolationKind kind = ViolationKind::IllegalRecolor;
            if (recorded.move != replayed.move || recorded.aborted != replayed.aborted)
                kind = ViolationKind::NonUnitMove;
            report.violations.push_back({step, kind,
                                         "recorded event diverges from replay (rule " +
                                             recorded.rule.value_or("-") + " vs " +
                                             replayed.rule.value_or("-") + ")"});
        }
        for (const auto& v : world.violations) report.violations.push_back(v);
        world.violations.clear();
    }
    report.finalConfig = world.config();
    // read_trace reconstructs final_ from the events; run() records it
    // directly. Either way it must match the replay.
    bool finalMatches =
        std::equal(report.finalConfig.robots.begin(), report.finalConfig.robots.end(),
                   trace.final_.robots.begin(), trace.final_.robots.end(),
                   [](const RobotRecord& a, const RobotRecord& b) {
                       return a.id == b.id && a.pos == b.pos && a.color == b.color;
                   });
    if (report.finalConfig.size() != trace.final_.size() || !finalMatches)
        report.violations.push_back({trace.events.size(), ViolationKind::Occupancy,
                                     "final configuration does not match the replayed one"});
    return report;
}

}  // namespace gridvis
