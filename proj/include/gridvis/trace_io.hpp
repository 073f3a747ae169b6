#pragma once

// JSONL trace files. Line 1 is the init record, then one line per event,
// then one outcome record. Traces round-trip: read(write(t)) reproduces the
// event list bit for bit, which the replay checker and the trace hash rely on.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gridvis/geometry.hpp"
#include "gridvis/sim.hpp"

namespace gridvis {

inline json scheduler_to_json(const SchedulerSpec& s) {
    switch (s.kind) {
        case SchedulerSpec::Kind::Fsync:
            return json{{"kind", "fsync"}};
        case SchedulerSpec::Kind::Ssync:
            return json{{"kind", "ssync"}, {"seed", s.seed}, {"p", s.activationProbability}};
        case SchedulerSpec::Kind::AsyncRandom:
            return json{{"kind", "asyncRandom"}, {"seed", s.seed}, {"k", s.unfairnessBound}};
        case SchedulerSpec::Kind::AsyncAdversary:
            return json{{"kind", "asyncAdversary"}, {"heuristic", s.heuristic}};
        case SchedulerSpec::Kind::Exhaustive:
            return json{{"kind", "exhaustive"}, {"depth", s.depthBound}};
    }
    return json{};
}

inline SchedulerSpec scheduler_from_json(const json& j) {
    SchedulerSpec s;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "fsync") {
        s.kind = SchedulerSpec::Kind::Fsync;
    } else if (kind == "ssync") {
        s.kind = SchedulerSpec::Kind::Ssync;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.activationProbability = j.at("p").get<double>();
    } else if (kind == "asyncRandom") {
        s.kind = SchedulerSpec::Kind::AsyncRandom;
        s.seed = j.at("seed").get<std::uint64_t>();
        s.unfairnessBound = j.at("k").get<int>();
    } else if (kind == "asyncAdversary") {
        s.kind = SchedulerSpec::Kind::AsyncAdversary;
        s.heuristic = j.at("heuristic").get<std::string>();
    } else if (kind == "exhaustive") {
        s.kind = SchedulerSpec::Kind::Exhaustive;
        s.depthBound = j.at("depth").get<int>();
    } else {
        throw std::invalid_argument("unknown scheduler kind " + kind);
    }
    return s;
}

inline const char* move_dir_token(MoveDir d) {
    switch (d) {
        case MoveDir::XPlus: return "x+";
        case MoveDir::XMinus: return "x-";
        case MoveDir::YPlus: return "y+";
        case MoveDir::YMinus: return "y-";
        case MoveDir::None: return "_";
    }
    return "_";
}

inline MoveDir move_dir_from_token(const std::string& s) {
    if (s == "x+") return MoveDir::XPlus;
    if (s == "x-") return MoveDir::XMinus;
    if (s == "y+") return MoveDir::YPlus;
    if (s == "y-") return MoveDir::YMinus;
    if (s == "_") return MoveDir::None;
    throw std::invalid_argument("unknown move token " + s);
}

inline json event_to_json(const TraceEvent& ev) {
    json j{{"robot", ev.robot}, {"kind", event_kind_name(ev.kind)}};
    if (ev.rule) j["rule"] = *ev.rule;
    if (ev.recolor) j["recolor"] = std::string(1, color_char(*ev.recolor));
    if (ev.move) j["move"] = move_dir_token(*ev.move);
    if (ev.aborted) j["aborted"] = true;
    return j;
}

inline TraceEvent event_from_json(const json& j) {
    TraceEvent ev;
    ev.robot = j.at("robot").get<RobotId>();
    std::string op = j.at("kind").get<std::string>();
    if (op == "look")
        ev.kind = EventKind::Look;
    else if (op == "compute")
        ev.kind = EventKind::Compute;
    else if (op == "move")
        ev.kind = EventKind::Move;
    else
        throw std::invalid_argument("unknown event op " + op);
    if (j.contains("rule")) ev.rule = j["rule"].get<std::string>();
    if (j.contains("recolor")) ev.recolor = color_from_char(j["recolor"].get<std::string>().at(0));
    if (j.contains("move")) ev.move = move_dir_from_token(j["move"].get<std::string>());
    if (j.contains("aborted")) ev.aborted = j["aborted"].get<bool>();
    return ev;
}

inline const char* outcome_name(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Terminated: return "terminated";
        case OutcomeKind::StepLimit: return "stepLimit";
        case OutcomeKind::InvariantViolation: return "invariantViolation";
    }
    return "?";
}

inline OutcomeKind outcome_from_name(const std::string& s) {
    if (s == "terminated") return OutcomeKind::Terminated;
    if (s == "stepLimit") return OutcomeKind::StepLimit;
    if (s == "invariantViolation") return OutcomeKind::InvariantViolation;
    throw std::invalid_argument("unknown outcome " + s);
}

inline void write_trace(const Trace& trace, std::ostream& out) {
    json init{{"type", "init"},
              {"config", config_to_json(trace.initial)},
              {"scheduler", scheduler_to_json(trace.scheduler)},
              {"ruleset_hash", trace.rulesetHash}};
    out << init.dump() << '\n';
    for (const auto& ev : trace.events) {
        json j = event_to_json(ev);
        j["type"] = "event";
        out << j.dump() << '\n';
    }
    json outcome{{"type", "outcome"},
                 {"outcome", outcome_name(trace.outcome)},
                 {"rounds", trace.rounds},
                 {"area", bounding_area(trace.final_)},
                 {"diameter0", diameter(trace.initial)}};
    if (trace.violation) {
        outcome["violation"] = json{{"step", trace.violation->step},
                                    {"kind", violation_kind_name(trace.violation->kind)},
                                    {"detail", trace.violation->detail}};
    }
    out << outcome.dump() << '\n';
}

inline ViolationKind violation_kind_from_name(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(ViolationKind::ConflictAbort); ++k)
        if (s == violation_kind_name(static_cast<ViolationKind>(k)))
            return static_cast<ViolationKind>(k);
    throw std::invalid_argument("unknown violation kind " + s);
}

// Reads a full trace; the final configuration is reconstructed by replaying
// the recorded events over the initial configuration.
inline Trace read_trace(std::istream& in) {
    Trace trace;
    std::string line;
    bool haveInit = false, haveOutcome = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        std::string type = j.at("type").get<std::string>();
        if (type == "init") {
            trace.initial = config_from_json(j.at("config"));
            trace.scheduler = scheduler_from_json(j.at("scheduler"));
            trace.rulesetHash = j.at("ruleset_hash").get<std::uint64_t>();
            haveInit = true;
        } else if (type == "event") {
            trace.events.push_back(event_from_json(j));
        } else if (type == "outcome") {
            trace.outcome = outcome_from_name(j.at("outcome").get<std::string>());
            trace.rounds = j.at("rounds").get<std::int64_t>();
            if (j.contains("violation")) {
                ViolationRecord v;
                v.step = j["violation"].at("step").get<std::size_t>();
                v.kind = violation_kind_from_name(j["violation"].at("kind").get<std::string>());
                v.detail = j["violation"].at("detail").get<std::string>();
                trace.violation = v;
            }
            haveOutcome = true;
        } else {
            throw std::invalid_argument("unknown trace record type " + type);
        }
    }
    if (!haveInit || !haveOutcome) throw std::invalid_argument("truncated trace file");
    trace.final_ = trace.initial;
    for (const auto& ev : trace.events) {
        if (ev.recolor)
            if (auto* r = trace.final_.find(ev.robot)) r->color = *ev.recolor;
        if (ev.kind == EventKind::Move && ev.move && !ev.aborted)
            if (auto* r = trace.final_.find(ev.robot))
                r->pos = r->pos + Action{*ev.move, std::nullopt}.delta();
    }
    return trace;
}

// FNV-1a over the serialized trace text: one stable fingerprint per run.
inline std::uint64_t trace_hash(const Trace& trace) {
    std::ostringstream ss;
    write_trace(trace, ss);
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : ss.str()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace gridvis
