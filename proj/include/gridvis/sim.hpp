#pragma once

// Atomic Look/Compute/Move execution with stale snapshots, the FSYNC /
// SSYNC / ASYNC schedulers, bounded exhaustive interleaving exploration,
// round counting and trace recording.
//
// A single simulation is strictly sequential and deterministic for a given
// (initial configuration, scheduler spec, seed).

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "gridvis/algorithm.hpp"
#include "gridvis/geometry.hpp"
#include "gridvis/rules.hpp"

namespace gridvis {

enum class EventKind : std::uint8_t { Look, Compute, Move };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Look: return "look";
        case EventKind::Compute: return "compute";
        case EventKind::Move: return "move";
    }
    return "?";
}

enum class ViolationKind : std::uint8_t {
    Occupancy,
    NonUnitMove,
    SimultaneousTarget,
    IllegalRecolor,
    FrameMismatch,
    ConflictAbort,
};

inline const char* violation_kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::Occupancy: return "occupancy";
        case ViolationKind::NonUnitMove: return "nonUnitMove";
        case ViolationKind::SimultaneousTarget: return "simultaneousTarget";
        case ViolationKind::IllegalRecolor: return "illegalRecolor";
        case ViolationKind::FrameMismatch: return "frameMismatch";
        case ViolationKind::ConflictAbort: return "conflictAbort";
    }
    return "?";
}

struct ViolationRecord {
    std::size_t step = 0;  // index into the event list
    ViolationKind kind = ViolationKind::Occupancy;
    std::string detail;
};

struct TraceEvent {
    RobotId robot = 0;
    EventKind kind = EventKind::Look;
    std::optional<std::string> rule;     // compute: fired rule, if any
    std::optional<Color> recolor;        // compute: applied recolor
    std::optional<MoveDir> move;         // compute: intent / move: direction
    bool aborted = false;                // compute: snapshot veto; move: conflict

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct SchedulerSpec {
    enum class Kind { Fsync, Ssync, AsyncRandom, AsyncAdversary, Exhaustive };
    Kind kind = Kind::Fsync;
    std::uint64_t seed = 0;
    double activationProbability = 0.5;   // ssync
    int unfairnessBound = 3;              // asyncRandom: window is bound*n events
    std::string heuristic = "roundrobin"; // asyncAdversary: roundrobin | stale
    int depthBound = 300;                 // exhaustive
};

enum class OutcomeKind : std::uint8_t { Terminated, StepLimit, InvariantViolation };

struct Trace {
    Configuration initial;
    SchedulerSpec scheduler;
    std::uint64_t rulesetHash = 0;
    std::vector<TraceEvent> events;
    OutcomeKind outcome = OutcomeKind::StepLimit;
    std::optional<ViolationRecord> violation;
    Configuration final_;
    std::int64_t rounds = 0;
};

// ------------------------------------------------------------------ world

enum class CyclePhase : std::uint8_t { Idle, Looked, Computed };

struct CycleState {
    CyclePhase phase = CyclePhase::Idle;
    LocalView snapshot;
    std::optional<Action> pending;
};

inline bool rule_uses_symbol_m(const Rule& r) {
    auto term_uses = [](const LinTerm& t) { return t.mCoeff != 0; };
    auto axis_uses = [&](const AxisConstraint& c) { return term_uses(c.lo) || term_uses(c.hi); };
    for (const auto& a : r.atoms)
        for (const auto& reg : a.regions)
            if (axis_uses(reg.xc) || axis_uses(reg.yc)) return true;
    return false;
}

// Sequential execution core shared by the schedulers, the explorer and the
// trace auditor. Applies one atomic event at a time.
class World {
public:
    World(Configuration config, const RuleSet& rules)
        : config_(std::move(config)), rules_(&rules) {
        states_.resize(config_.size());
        for (std::size_t i = 0; i < config_.size(); ++i) indexOf_[config_.robots[i].id] = i;
    }

    const Configuration& config() const { return config_; }
    const std::vector<CycleState>& states() const { return states_; }
    std::size_t size() const { return config_.size(); }

    EventKind next_kind(std::size_t idx) const {
        switch (states_[idx].phase) {
            case CyclePhase::Idle: return EventKind::Look;
            case CyclePhase::Looked: return EventKind::Compute;
            case CyclePhase::Computed: return EventKind::Move;
        }
        return EventKind::Look;
    }

    bool all_idle() const {
        for (const auto& s : states_)
            if (s.phase != CyclePhase::Idle) return false;
        return true;
    }

    // Violations found while applying an event land here.
    std::vector<ViolationRecord> violations;

    TraceEvent apply(std::size_t idx, std::size_t stepIndex) {
        CycleState& st = states_[idx];
        RobotRecord& robot = config_.robots[idx];
        TraceEvent ev;
        ev.robot = robot.id;
        ev.kind = next_kind(idx);
        switch (ev.kind) {
            case EventKind::Look: {
                st.snapshot = visible_set(config_, robot.id);
                st.phase = CyclePhase::Looked;
                break;
            }
            case EventKind::Compute: {
                int frameCandidates = 0;
                EvalContext ctx = derive_context(st.snapshot, &frameCandidates);
                auto sel = select_action(st.snapshot, *rules_, ctx);
                st.phase = CyclePhase::Idle;
                st.pending.reset();
                if (sel) {
                    ev.rule = sel->ruleName;
                    check_frame(idx, ctx, frameCandidates, sel->ruleName, stepIndex);
                    if (sel->action.recolor) {
                        robot.color = *sel->action.recolor;
                        ev.recolor = *sel->action.recolor;
                    }
                    if (sel->action.move != MoveDir::None) {
                        ev.move = sel->action.move;
                        Point destRel = sel->action.delta();
                        bool occupiedInSnapshot = false;
                        for (const auto& e : st.snapshot.entries)
                            if (e.pos == destRel) occupiedInSnapshot = true;
                        if (occupiedInSnapshot) {
                            ev.aborted = true;  // the common occupied-destination veto
                        } else {
                            st.pending = sel->action;
                            st.phase = CyclePhase::Computed;
                        }
                    }
                }
                break;
            }
            case EventKind::Move: {
                Action act = *st.pending;
                ev.move = act.move;
                Point dest = robot.pos + act.delta();
                if (config_.occupied(dest)) {
                    ev.aborted = true;  // stale snapshot: destination taken meanwhile
                    violations.push_back({stepIndex, ViolationKind::ConflictAbort,
                                          "robot " + std::to_string(robot.id) +
                                              " move aborted at ground truth"});
                } else {
                    robot.pos = dest;
                }
                st.pending.reset();
                st.phase = CyclePhase::Idle;
                break;
            }
        }
        if (!config_.positions_distinct())
            violations.push_back({stepIndex, ViolationKind::Occupancy, "duplicate positions"});
        return ev;
    }

    // Quiescence: everyone Idle and a fresh Look+Compute yields no action.
    bool is_terminal() const {
        if (!all_idle()) return false;
        for (const auto& r : config_.robots) {
            LocalView view = visible_set(config_, r.id);
            if (select_action(view, *rules_, derive_context(view))) return false;
        }
        return true;
    }

    // All idle and quiescent, but some rule guard still holds and only the
    // occupied-destination veto keeps it from firing: a blocked non-final
    // rest state the explorer should flag.
    bool is_stuck() const {
        if (!is_terminal()) return false;
        for (const auto& r : config_.robots) {
            LocalView view = visible_set(config_, r.id);
            EvalContext ctx = derive_context(view);
            for (const auto& rule : rules_->rules)
                if (eval_rule(view, rule, ctx)) return true;
        }
        return false;
    }

private:
    // Cross-check derived frames against global ground truth. The robots can
    // only infer the frame; the simulator verifies the inference, but only
    // when the fired rule actually consumed it. Mid-run color churn produces
    // harmless coincidental patterns that no rule ever acts on.
    void check_frame(std::size_t idx, const EvalContext& ctx, int frameCandidates,
                     const std::string& ruleName, std::size_t stepIndex) {
        std::int64_t n = static_cast<std::int64_t>(config_.size());
        if (n < 4) return;
        const Rule* fired = nullptr;
        for (const auto& r : rules_->rules)
            if (r.name == ruleName) fired = &r;
        if (!fired) return;
        bool consumesFrame = !fired->ctxAtoms.empty();
        for (const auto& a : fired->ctxAtoms)
            if (a.kind == CtxAtom::Kind::LookCS && !a.expected) consumesFrame = false;
        std::int64_t mTrue = smallest_prime_geq(n);
        if (ctx.lookCS && consumesFrame) {
            if (frameCandidates > 1) {
                violations.push_back({stepIndex, ViolationKind::FrameMismatch,
                                      "ambiguous reference frame: " +
                                          std::to_string(frameCandidates) + " candidates"});
                return;
            }
            if (*ctx.frameM != mTrue) {
                violations.push_back({stepIndex, ViolationKind::FrameMismatch,
                                      "derived m=" + std::to_string(*ctx.frameM) +
                                          " but true m=" + std::to_string(mTrue)});
                return;
            }
            // The derived origin must be a real B robot with the B pattern.
            Point origin = config_.robots[idx].pos - *ctx.myLocation;
            bool o = false, d = false, t = false;
            for (const auto& r : config_.robots) {
                if (r.color != Color::B) continue;
                if (r.pos == origin) o = true;
                if (r.pos == origin + Point{1, 1}) d = true;
                if (r.pos == origin + Point{1, mTrue - 1}) t = true;
            }
            if (!(o && d && t))
                violations.push_back({stepIndex, ViolationKind::FrameMismatch,
                                      "derived origin does not match the reference robots"});
        } else if (!ctx.lookCS && ctx.mHat) {
            // A rule that resolved the symbol m by counting must have seen
            // everyone; divergence from the true n is an algorithm bug.
            if (rule_uses_symbol_m(*fired) && *ctx.mHat != mTrue)
                violations.push_back({stepIndex, ViolationKind::FrameMismatch,
                                      "counted m=" + std::to_string(*ctx.mHat) +
                                          " but true m=" + std::to_string(mTrue)});
        }
    }

    Configuration config_;
    std::vector<CycleState> states_;
    const RuleSet* rules_;
    std::map<RobotId, std::size_t> indexOf_;
};

// ------------------------------------------------------------- round count

// Greedy partition of the event list into minimal windows where every robot
// completes a full cycle (Move, or Compute that yields no pending move).
inline std::int64_t round_count(const std::vector<TraceEvent>& events, std::size_t robotCount,
                                const Configuration& initial) {
    if (robotCount == 0) return 0;
    std::map<RobotId, bool> done;
    for (const auto& r : initial.robots) done[r.id] = false;
    std::map<RobotId, bool> hasPending;  // compute produced a pending move
    std::int64_t rounds = 0;
    std::size_t doneCount = 0;
    bool sawEvent = false;
    for (const auto& ev : events) {
        sawEvent = true;
        bool completes = false;
        if (ev.kind == EventKind::Move) completes = true;
        if (ev.kind == EventKind::Compute) {
            bool pending = ev.move && !ev.aborted;
            hasPending[ev.robot] = pending;
            if (!pending) completes = true;  // Wait (or recolor-only) cycle
        }
        if (completes && !done[ev.robot]) {
            done[ev.robot] = true;
            ++doneCount;
        }
        if (doneCount == robotCount) {
            ++rounds;
            for (auto& [id, f] : done) f = false;
            doneCount = 0;
            sawEvent = false;
        }
    }
    if (sawEvent && doneCount > 0) ++rounds;  // trailing partial window
    return rounds;
}

inline std::int64_t round_count(const Trace& trace) {
    return round_count(trace.events, trace.initial.size(), trace.initial);
}

// -------------------------------------------------------------------- run

struct RunObserver {
    virtual ~RunObserver() = default;
    // Called after every applied event with the live world.
    virtual void on_event(const World& world, const TraceEvent& ev) = 0;
};

namespace detail {

inline bool finish_violation(Trace& trace, World& world) {
    if (world.violations.empty()) return false;
    // Conflict aborts are diagnostics, not violations of the model.
    for (const auto& v : world.violations)
        if (v.kind != ViolationKind::ConflictAbort) {
            trace.outcome = OutcomeKind::InvariantViolation;
            trace.violation = v;
            return true;
        }
    return false;
}

// One synchronous tick for a chosen subset: all Look, all Compute, then all
// Move. Two simultaneous moves onto one cell are an invariant violation (the
// model defines no resolution and silently picking a winner would mask bugs).
inline bool sync_tick(World& world, const std::vector<std::size_t>& active, Trace& trace,
                      RunObserver* obs) {
    auto emit = [&](std::size_t idx) {
        TraceEvent ev = world.apply(idx, trace.events.size());
        trace.events.push_back(ev);
        if (obs) obs->on_event(world, ev);
    };
    for (std::size_t idx : active) emit(idx);  // Look
    for (std::size_t idx : active) emit(idx);  // Compute
    std::set<Point> targets;
    for (std::size_t idx : active) {
        const auto& st = world.states()[idx];
        if (st.phase != CyclePhase::Computed) continue;
        Point dest = world.config().robots[idx].pos + st.pending->delta();
        if (!targets.insert(dest).second) {
            trace.outcome = OutcomeKind::InvariantViolation;
            trace.violation = ViolationRecord{trace.events.size(), ViolationKind::SimultaneousTarget,
                                              "two robots target the same cell"};
            return false;
        }
    }
    for (std::size_t idx : active)
        if (world.states()[idx].phase == CyclePhase::Computed) emit(idx);
    return !finish_violation(trace, world);
}

}  // namespace detail

inline Trace run(const Configuration& config0, const RuleSet& ruleset,
                 const SchedulerSpec& scheduler, std::size_t stepLimit,
                 RunObserver* obs = nullptr) {
    Trace trace;
    trace.initial = config0;
    trace.scheduler = scheduler;
    trace.rulesetHash = ruleset_hash(ruleset);
    World world(config0, ruleset);
    std::mt19937_64 rng(scheduler.seed);
    const std::size_t n = world.size();

    auto emit = [&](std::size_t idx) {
        TraceEvent ev = world.apply(idx, trace.events.size());
        trace.events.push_back(ev);
        if (obs) obs->on_event(world, ev);
    };

    // Terminal sweeps are only needed when the configuration changed.
    bool dirty = true;
    auto terminal_now = [&]() {
        if (!world.all_idle()) return false;
        if (!dirty) return false;
        if (world.is_terminal()) return true;
        dirty = false;
        return false;
    };
    std::size_t lastEventCount = 0;
    auto mark_dirty = [&]() {
        // Any recolor or position change invalidates the cached sweep.
        for (std::size_t i = lastEventCount; i < trace.events.size(); ++i) {
            const auto& ev = trace.events[i];
            if (ev.recolor || (ev.kind == EventKind::Move && !ev.aborted)) dirty = true;
        }
        lastEventCount = trace.events.size();
    };

    auto finish = [&](OutcomeKind kind) {
        trace.outcome = kind;
        trace.final_ = world.config();
        trace.rounds = round_count(trace);
    };

    switch (scheduler.kind) {
        case SchedulerSpec::Kind::Fsync:
        case SchedulerSpec::Kind::Ssync: {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            std::bernoulli_distribution act(scheduler.activationProbability);
            while (trace.events.size() < stepLimit) {
                std::vector<std::size_t> active;
                if (scheduler.kind == SchedulerSpec::Kind::Fsync) {
                    active = all;
                } else {
                    while (active.empty())
                        for (std::size_t i = 0; i < n; ++i)
                            if (act(rng)) active.push_back(i);
                }
                if (!detail::sync_tick(world, active, trace, obs)) {
                    trace.final_ = world.config();
                    trace.rounds = round_count(trace);
                    return trace;
                }
                mark_dirty();
                if (terminal_now()) {
                    finish(OutcomeKind::Terminated);
                    return trace;
                }
            }
            finish(OutcomeKind::StepLimit);
            return trace;
        }
        case SchedulerSpec::Kind::AsyncRandom: {
            std::vector<std::size_t> age(n, 0);
            std::size_t window = static_cast<std::size_t>(scheduler.unfairnessBound) * n;
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            while (trace.events.size() < stepLimit) {
                std::size_t chosen = n;
                for (std::size_t i = 0; i < n; ++i)
                    if (age[i] + 1 >= window && (chosen == n || age[i] > age[chosen])) chosen = i;
                if (chosen == n) chosen = pick(rng);
                for (std::size_t i = 0; i < n; ++i) ++age[i];
                age[chosen] = 0;
                emit(chosen);
                if (detail::finish_violation(trace, world)) {
                    trace.final_ = world.config();
                    trace.rounds = round_count(trace);
                    return trace;
                }
                mark_dirty();
                if (terminal_now()) {
                    finish(OutcomeKind::Terminated);
                    return trace;
                }
            }
            finish(OutcomeKind::StepLimit);
            return trace;
        }
        case SchedulerSpec::Kind::AsyncAdversary: {
            bool stale = scheduler.heuristic == "stale";
            while (trace.events.size() < stepLimit) {
                if (stale) {
                    // Everyone Looks first, then computes and moves in order:
                    // the later robots act on maximally stale snapshots.
                    for (std::size_t i = 0; i < n; ++i) emit(i);
                    for (std::size_t i = 0; i < n; ++i) {
                        emit(i);
                        if (world.states()[i].phase == CyclePhase::Computed) emit(i);
                    }
                } else {  // roundrobin: one full cycle per robot in turn
                    for (std::size_t i = 0; i < n; ++i) {
                        emit(i);
                        emit(i);
                        if (world.states()[i].phase == CyclePhase::Computed) emit(i);
                    }
                }
                if (detail::finish_violation(trace, world)) {
                    trace.final_ = world.config();
                    trace.rounds = round_count(trace);
                    return trace;
                }
                mark_dirty();
                if (terminal_now()) {
                    finish(OutcomeKind::Terminated);
                    return trace;
                }
            }
            finish(OutcomeKind::StepLimit);
            return trace;
        }
        case SchedulerSpec::Kind::Exhaustive:
            throw std::invalid_argument("run: use explore() for the exhaustive scheduler");
    }
    finish(OutcomeKind::StepLimit);
    return trace;
}

// ---------------------------------------------------------------- explore

struct ExplorationReport {
    std::size_t statesVisited = 0;
    std::vector<Configuration> terminalConfigs;  // canonicalized, deduplicated
    std::size_t stuckStates = 0;
    std::size_t conflictAborts = 0;
    std::size_t frameViolations = 0;
    std::size_t occupancyViolations = 0;
    std::set<std::string> firedRules;
    std::vector<std::string> deadRules;  // never fired anywhere in the search
    bool depthBoundHit = false;
    bool incomplete = false;  // state cap overflow
};

namespace detail {

// Global position is unobservable, so states are hashed translation-free.
inline std::string canonical_key(const World& world) {
    const auto& cfg = world.config();
    std::int64_t xmin = cfg.robots[0].pos.x, ymin = cfg.robots[0].pos.y;
    for (const auto& r : cfg.robots) {
        xmin = std::min(xmin, r.pos.x);
        ymin = std::min(ymin, r.pos.y);
    }
    std::vector<std::size_t> order(cfg.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.robots[a].pos < cfg.robots[b].pos;
    });
    std::ostringstream key;
    for (std::size_t i : order) {
        const auto& r = cfg.robots[i];
        const auto& st = world.states()[i];
        key << (r.pos.x - xmin) << ',' << (r.pos.y - ymin) << ',' << color_char(r.color) << ','
            << static_cast<int>(st.phase);
        if (st.phase != CyclePhase::Idle) {
            key << color_char(st.snapshot.myColor);
            for (const auto& e : st.snapshot.entries)
                key << '(' << e.pos.x << ',' << e.pos.y << color_char(e.color) << ')';
        }
        if (st.pending) key << 'p' << static_cast<int>(st.pending->move);
        key << ';';
    }
    return key.str();
}

inline Configuration canonical_config(const Configuration& cfg) {
    Configuration out = cfg;
    std::int64_t xmin = cfg.robots[0].pos.x, ymin = cfg.robots[0].pos.y;
    for (const auto& r : cfg.robots) {
        xmin = std::min(xmin, r.pos.x);
        ymin = std::min(ymin, r.pos.y);
    }
    for (auto& r : out.robots) r.pos = {r.pos.x - xmin, r.pos.y - ymin};
    std::sort(out.robots.begin(), out.robots.end(),
              [](const RobotRecord& a, const RobotRecord& b) { return a.pos < b.pos; });
    return out;
}

}  // namespace detail

inline ExplorationReport explore(const Configuration& config0, const RuleSet& ruleset,
                                 int depthBound, std::size_t stateCap = 2'000'000) {
    ExplorationReport report;
    std::unordered_set<std::string> visited;
    std::set<std::string> terminalKeys;
    std::set<std::string> stuckKeys;

    struct Frame {
        World world;
        int depth;
    };
    std::vector<Frame> stack;
    stack.push_back({World(config0, ruleset), 0});
    visited.insert(detail::canonical_key(stack.back().world));

    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        ++report.statesVisited;
        if (visited.size() > stateCap) {
            report.incomplete = true;
            break;
        }

        if (frame.world.is_terminal()) {
            std::string key = detail::canonical_key(frame.world);
            if (terminalKeys.insert(key).second)
                report.terminalConfigs.push_back(detail::canonical_config(frame.world.config()));
            if (frame.world.is_stuck() && stuckKeys.insert(key).second) ++report.stuckStates;
            continue;
        }
        if (frame.depth >= depthBound) {
            report.depthBoundHit = true;
            continue;
        }
        for (std::size_t i = 0; i < frame.world.size(); ++i) {
            World next = frame.world;
            TraceEvent ev = next.apply(i, 0);
            if (ev.rule) report.firedRules.insert(*ev.rule);
            if (ev.kind == EventKind::Move && ev.aborted) ++report.conflictAborts;
            for (const auto& v : next.violations) {
                if (v.kind == ViolationKind::FrameMismatch) ++report.frameViolations;
                if (v.kind == ViolationKind::Occupancy) ++report.occupancyViolations;
            }
            next.violations.clear();
            if (visited.insert(detail::canonical_key(next)).second)
                stack.push_back({std::move(next), frame.depth + 1});
        }
    }
    for (const auto& r : ruleset.rules)
        if (!report.firedRules.count(r.name)) report.deadRules.push_back(r.name);
    return report;
}

}  // namespace gridvis
