#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "gridvis/geometry.hpp"

using namespace gridvis;

namespace {

Configuration make_config(std::initializer_list<std::pair<Point, Color>> robots) {
    Configuration c;
    RobotId id = 0;
    for (const auto& [p, col] : robots) c.robots.push_back({id++, p, col});
    return c;
}

Configuration load_fixture(const std::string& name) {
    std::ifstream in(std::string(GRIDVIS_FIXTURES_DIR) + "/" + name);
    REQUIRE(in.good());
    return config_from_json(json::parse(in));
}

// Tiny deterministic RNG so property tests never depend on library details.
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

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    a = std::abs(a);
    b = std::abs(b);
    while (b) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Independent visibility oracle: walk the gcd-many interior lattice points of
// the segment and ask whether any is occupied.
bool visible_oracle(const Configuration& c, Point from, Point to) {
    Point d = to - from;
    std::int64_t g = gcd64(d.x, d.y);
    for (std::int64_t t = 1; t < g; ++t) {
        Point p{from.x + d.x / g * t, from.y + d.y / g * t};
        if (c.occupied(p)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("collinearity is an exact cross product test") {
    CHECK(collinear({0, 0}, {2, 1}, {4, 2}));
    CHECK_FALSE(collinear({0, 0}, {1, 1}, {4, 2}));
    CHECK(collinear({0, 0}, {0, 3}, {0, -5}));
    CHECK(collinear({1, 1}, {1, 1}, {7, -3}));  // degenerate pairs are collinear
    // Large coordinates stay exact.
    CHECK(collinear({0, 0}, {1000000, 1}, {2000000, 2}));
    CHECK_FALSE(collinear({0, 0}, {1000000, 1}, {2000000, 3}));
}

TEST_CASE("blocking requires strict interior collinearity") {
    CHECK(blocks({0, 0}, {4, 2}, {2, 1}));
    CHECK_FALSE(blocks({0, 0}, {4, 2}, {4, 2}));  // endpoint
    CHECK_FALSE(blocks({0, 0}, {4, 2}, {0, 0}));  // endpoint
    CHECK_FALSE(blocks({0, 0}, {4, 2}, {6, 3}));  // collinear but outside
    CHECK_FALSE(blocks({0, 0}, {4, 2}, {1, 1}));  // off the line
    CHECK(blocks({0, 0}, {0, 4}, {0, 1}));
    CHECK(blocks({3, 3}, {-3, -3}, {0, 0}));
}

TEST_CASE("view of a column sees only the nearest robot") {
    auto c = make_config({{{0, 0}, Color::A}, {{0, 1}, Color::A}, {{0, 2}, Color::B},
                          {{0, 3}, Color::B}});
    LocalView v = visible_set(c, 0);
    REQUIRE(v.entries.size() == 1);
    CHECK(v.entries[0].pos == Point{0, 1});
    CHECK(v.entries[0].color == Color::A);
    CHECK(v.myColor == Color::A);
}

TEST_CASE("two robots always see each other") {
    auto c = make_config({{{3, 7}, Color::A}, {{-2, -1}, Color::B}});
    LocalView v0 = visible_set(c, 0);
    REQUIRE(v0.entries.size() == 1);
    CHECK(v0.entries[0].pos == Point{-5, -8});
    CHECK(v0.entries[0].color == Color::B);
    LocalView v1 = visible_set(c, 1);
    REQUIRE(v1.entries.size() == 1);
    CHECK(v1.entries[0].pos == Point{5, 8});
}

TEST_CASE("view is translation relative and excludes the observer") {
    auto c = load_fixture("ce_n9.json");
    // Observer at (2,2) sees the top reference robot at relative (-1,8).
    RobotId obs = 0;
    for (const auto& r : c.robots)
        if (r.pos == Point{2, 2}) obs = r.id;
    LocalView v = visible_set(c, obs);
    bool found = false;
    for (const auto& e : v.entries) {
        CHECK(e.pos != Point{0, 0});
        if (e.pos == Point{-1, 8}) {
            found = true;
            CHECK(e.color == Color::B);
        }
    }
    CHECK(found);
}

TEST_CASE("views agree with the lattice point oracle") {
    Lcg rng(12345);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 2 + rng.next() % 9;
        Configuration c = random_config(rng, n, 8);
        for (const auto& obs : c.robots) {
            LocalView view = visible_set(c, obs.id);
            std::set<Point> seen;
            for (const auto& e : view.entries) seen.insert(e.pos);
            for (const auto& q : c.robots) {
                if (q.id == obs.id) continue;
                CHECK(seen.count(q.pos - obs.pos) ==
                      (visible_oracle(c, obs.pos, q.pos) ? 1u : 0u));
            }
        }
    }
}

TEST_CASE("visibility is symmetric") {
    Lcg rng(999);
    for (int iter = 0; iter < 100; ++iter) {
        Configuration c = random_config(rng, 3 + rng.next() % 8, 7);
        for (const auto& a : c.robots) {
            LocalView va = visible_set(c, a.id);
            for (const auto& b : c.robots) {
                if (a.id == b.id) continue;
                LocalView vb = visible_set(c, b.id);
                bool ab = false, ba = false;
                for (const auto& e : va.entries)
                    if (e.pos == b.pos - a.pos) ab = true;
                for (const auto& e : vb.entries)
                    if (e.pos == a.pos - b.pos) ba = true;
                CHECK(ab == ba);
            }
        }
    }
}

TEST_CASE("views are invariant under global translation") {
    Lcg rng(4242);
    for (int iter = 0; iter < 50; ++iter) {
        Configuration c = random_config(rng, 4 + rng.next() % 6, 9);
        Point shift{rng.range(-50, 50), rng.range(-50, 50)};
        Configuration moved = c;
        for (auto& r : moved.robots) r.pos = r.pos + shift;
        for (const auto& r : c.robots) {
            LocalView v1 = visible_set(c, r.id);
            LocalView v2 = visible_set(moved, r.id);
            CHECK(v1.entries == v2.entries);
            CHECK(v1.myColor == v2.myColor);
        }
    }
}

TEST_CASE("diameter is the maximum Manhattan distance") {
    CHECK(diameter(make_config({{{5, -3}, Color::A}})) == 0);
    CHECK(diameter(make_config({{{0, 0}, Color::A}, {{3, 4}, Color::A}})) == 7);
    CHECK(diameter(load_fixture("ce_n9.json")) == 11);
    CHECK_THROWS_AS(diameter(Configuration{}), std::invalid_argument);
}

TEST_CASE("bounding area counts grid cells") {
    CHECK(bounding_area(make_config({{{0, 0}, Color::A}, {{1, 10}, Color::B}})) == 22);
    CHECK(bounding_area(make_config({{{7, 7}, Color::A}})) == 1);
    CHECK(bounding_area(load_fixture("cf_n4.json")) <= 25);
    CHECK_THROWS_AS(bounding_area(Configuration{}), std::invalid_argument);
}

TEST_CASE("configuration json round trips") {
    auto c = make_config({{{-3, 12}, Color::A}, {{0, 0}, Color::B}, {{100, -7}, Color::A}});
    Configuration back = config_from_json(config_to_json(c));
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.robots[i].pos == c.robots[i].pos);
        CHECK(back.robots[i].color == c.robots[i].color);
    }
}

TEST_CASE("configuration json rejects malformed input") {
    CHECK_THROWS_AS(config_from_json(json::parse("{}")), std::invalid_argument);
    CHECK_THROWS(config_from_json(
        json::parse(R"({"robots":[{"x":0,"y":0,"color":"Q"}]})")));
    // Duplicate positions are rejected on load.
    CHECK_THROWS_AS(config_from_json(json::parse(
                        R"({"robots":[{"x":1,"y":2,"color":"A"},{"x":1,"y":2,"color":"B"}]})")),
                    std::invalid_argument);
}

TEST_CASE("find and occupied report ground truth") {
    auto c = make_config({{{2, 3}, Color::A}, {{4, 5}, Color::B}});
    CHECK(c.occupied({2, 3}));
    CHECK_FALSE(c.occupied({3, 3}));
    REQUIRE(c.find(1) != nullptr);
    CHECK(c.find(1)->pos == Point{4, 5});
    CHECK(c.find(99) == nullptr);
}
