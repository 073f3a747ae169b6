#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include "gridvis/checkers.hpp"
#include "gridvis/trace_io.hpp"

using namespace gridvis;

namespace {

Configuration load_fixture(const std::string& name) {
    std::ifstream in(std::string(GRIDVIS_FIXTURES_DIR) + "/" + name);
    REQUIRE(in.good());
    return config_from_json(json::parse(in));
}

Configuration make_config(std::initializer_list<std::pair<Point, Color>> robots) {
    Configuration c;
    RobotId id = 0;
    for (const auto& [p, col] : robots) c.robots.push_back({id++, p, col});
    return c;
}

struct Lcg {
    std::uint64_t s;
    explicit Lcg(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

Configuration random_config(Lcg& rng, std::size_t n, std::int64_t side) {
    Configuration c;
    std::set<Point> used;
    while (c.robots.size() < n) {
        Point p{rng.range(0, side - 1), rng.range(0, side - 1)};
        if (!used.insert(p).second) continue;
        c.robots.push_back({static_cast<RobotId>(c.robots.size()), p,
                            rng.next() % 2 ? Color::A : Color::B});
    }
    return c;
}

}  // namespace

TEST_CASE("complete visibility on hand picked configurations") {
    Configuration goal;
    RobotId id = 0;
    for (auto p : roth_points(5, {0, 1, 2, 4})) goal.robots.push_back({id++, p, Color::B});
    CHECK(complete_visibility(goal));
    CHECK(no_three_collinear(goal));

    auto column = make_config({{{0, 0}, Color::B}, {{0, 1}, Color::A}, {{0, 2}, Color::B}});
    CHECK_FALSE(complete_visibility(column));
    CHECK_FALSE(no_three_collinear(column));

    auto pair = make_config({{{0, 0}, Color::A}, {{9, 4}, Color::B}});
    CHECK(complete_visibility(pair));
    CHECK(no_three_collinear(pair));
    CHECK(complete_visibility(Configuration{}));
}

TEST_CASE("the pairwise and collinearity phrasings coincide") {
    Lcg rng(808);
    for (int iter = 0; iter < 300; ++iter) {
        Configuration c = random_config(rng, 3 + rng.next() % 8, 6);
        CHECK(complete_visibility(c) == no_three_collinear(c));
    }
}

TEST_CASE("every goal classification implies complete visibility") {
    Lcg rng(909);
    for (int iter = 0; iter < 50; ++iter) {
        std::int64_t n = 4 + static_cast<std::int64_t>(rng.next() % 9);
        std::int64_t m = smallest_prime_geq(n);
        // Row 0 anchors the origin robot; the rest is a random distinct pick.
        std::vector<std::int64_t> rest;
        for (std::int64_t i = 1; i < m; ++i) rest.push_back(i);
        for (std::size_t i = rest.size() - 1; i > 0; --i)
            std::swap(rest[i], rest[rng.next() % (i + 1)]);
        std::vector<std::int64_t> rows{0};
        rows.insert(rows.end(), rest.begin(), rest.begin() + (n - 1));
        Configuration c;
        RobotId id = 0;
        for (auto p : roth_points(m, rows)) c.robots.push_back({id++, p, Color::B});
        REQUIRE(classify(c) == Milestone::C_F);
        CHECK(complete_visibility(c));
    }
}

TEST_CASE("final metrics summarize a real run") {
    Trace t = run(load_fixture("ce_n9.json"), builtin_ruleset(), SchedulerSpec{}, 100000);
    REQUIRE(t.outcome == OutcomeKind::Terminated);
    FinalMetrics m = final_metrics(t);
    CHECK(m.rounds == t.rounds);
    CHECK(m.milestone == Milestone::C_F);
    CHECK(m.completeVisibility);
    CHECK(m.conflicts == 0);
    CHECK(m.moves > 0);
    CHECK(m.area <= 11 * 11);
    CHECK(m.diameter0 == 11);
}

TEST_CASE("a goal start yields a quiet one round trace") {
    Trace t = run(load_fixture("cf_n4.json"), builtin_ruleset(), SchedulerSpec{}, 1000);
    FinalMetrics m = final_metrics(t);
    CHECK(m.rounds == 1);
    CHECK(m.moves == 0);
    CHECK(m.conflicts == 0);
    CHECK(m.milestone == Milestone::C_F);
}

TEST_CASE("auditing a faithful trace is clean") {
    RuleSet rs = builtin_ruleset();
    for (const char* fixture : {"ce_n9.json", "cd_n4.json"}) {
        Trace t = run(load_fixture(fixture), rs, SchedulerSpec{}, 200000);
        REQUIRE(t.outcome == OutcomeKind::Terminated);
        AuditReport rep = audit_trace(t, rs);
        CHECK(rep.clean());
        CHECK(rep.finalConfig.size() == t.final_.size());
    }
}

TEST_CASE("auditing is stable under repetition") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("ce_n4.json"), rs, SchedulerSpec{}, 100000);
    AuditReport a = audit_trace(t, rs);
    AuditReport b = audit_trace(t, rs);
    CHECK(a.violations.size() == b.violations.size());
    CHECK(a.clean() == b.clean());
}

TEST_CASE("a tampered move direction is caught as a non unit move") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("ce_n9.json"), rs, SchedulerSpec{}, 100000);
    REQUIRE(t.outcome == OutcomeKind::Terminated);
    Trace bad = t;
    bool flipped = false;
    for (auto& ev : bad.events) {
        if (ev.kind == EventKind::Move && !ev.aborted && ev.move) {
            ev.move = (*ev.move == MoveDir::XPlus) ? MoveDir::XMinus : MoveDir::XPlus;
            flipped = true;
            break;
        }
    }
    REQUIRE(flipped);
    AuditReport rep = audit_trace(bad, rs);
    CHECK_FALSE(rep.clean());
    bool sawNonUnit = false;
    for (const auto& v : rep.violations)
        if (v.kind == ViolationKind::NonUnitMove) sawNonUnit = true;
    CHECK(sawNonUnit);
}

TEST_CASE("a tampered recolor is caught as an illegal recolor") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("cd_n4.json"), rs, SchedulerSpec{}, 100000);
    Trace bad = t;
    bool flipped = false;
    for (auto& ev : bad.events) {
        if (ev.kind == EventKind::Compute && ev.recolor) {
            ev.recolor = (*ev.recolor == Color::A) ? Color::B : Color::A;
            flipped = true;
            break;
        }
    }
    REQUIRE(flipped);
    AuditReport rep = audit_trace(bad, rs);
    CHECK_FALSE(rep.clean());
    bool sawIllegal = false;
    for (const auto& v : rep.violations)
        if (v.kind == ViolationKind::IllegalRecolor) sawIllegal = true;
    CHECK(sawIllegal);
}

TEST_CASE("a trace recorded under a different ruleset is flagged") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("cf_n4.json"), rs, SchedulerSpec{}, 1000);
    RuleSet other = rs;
    other.rules[0].action.move = MoveDir::XMinus;
    AuditReport rep = audit_trace(t, other);
    CHECK_FALSE(rep.clean());
}

TEST_CASE("out of cycle events are rejected") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("cd_n4.json"), rs, SchedulerSpec{}, 100000);
    Trace bad = t;
    REQUIRE(bad.events.size() >= 2);
    // Duplicating the first look puts that robot out of cycle order.
    bad.events.insert(bad.events.begin() + 1, bad.events.front());
    AuditReport rep = audit_trace(bad, rs);
    CHECK_FALSE(rep.clean());
}

TEST_CASE("a forged final configuration is detected") {
    RuleSet rs = builtin_ruleset();
    Trace t = run(load_fixture("cf_n4.json"), rs, SchedulerSpec{}, 1000);
    Trace bad = t;
    bad.final_.robots[0].pos.x += 3;
    AuditReport rep = audit_trace(bad, rs);
    CHECK_FALSE(rep.clean());
}
