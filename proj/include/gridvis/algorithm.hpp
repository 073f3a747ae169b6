#pragma once

// The two-color complete-visibility algorithm proper: the builtin 26-rule
// set, reference-frame inference, prime/placement helpers and the milestone
// configuration classifiers.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridvis/geometry.hpp"
#include "gridvis/rules.hpp"

#ifndef GRIDVIS_RULES_DIR
#define GRIDVIS_RULES_DIR "rules"
#endif

namespace gridvis {

enum class Milestone : std::uint8_t { None, C_A, C_B, C_C, C_D, C_E, C_F };

inline const char* milestone_name(Milestone m) {
    switch (m) {
        case Milestone::None: return "none";
        case Milestone::C_A: return "C_A";
        case Milestone::C_B: return "C_B";
        case Milestone::C_C: return "C_C";
        case Milestone::C_D: return "C_D";
        case Milestone::C_E: return "C_E";
        case Milestone::C_F: return "C_F";
    }
    return "?";
}

// 0 = none, 1..6 = C_A..C_F in phase order.
inline int milestone_rank(Milestone m) { return static_cast<int>(m); }

inline bool is_prime(std::int64_t v) {
    if (v < 2) return false;
    if (v < 4) return true;
    if (v % 2 == 0 || v % 3 == 0) return false;
    for (std::int64_t d = 5; d * d <= v; d += 6)
        if (v % d == 0 || v % (d + 2) == 0) return false;
    return true;
}

inline std::int64_t smallest_prime_geq(std::int64_t n) {
    if (n < 2) throw std::invalid_argument("smallest_prime_geq: n must be >= 2");
    std::int64_t m = n;
    while (!is_prime(m)) ++m;
    return m;
}

// The collinearity-free placement (i^2 mod m, i) for prime m.
inline std::vector<Point> roth_points(std::int64_t m, const std::vector<std::int64_t>& iset) {
    if (!is_prime(m)) throw std::invalid_argument("roth_points: m must be prime");
    std::set<std::int64_t> seen;
    std::vector<Point> pts;
    for (std::int64_t i : iset) {
        if (i < 0 || i >= m) throw std::invalid_argument("roth_points: i out of [0,m-1]");
        if (!seen.insert(i).second) throw std::invalid_argument("roth_points: duplicate i");
        pts.push_back({(i * i) % m, i});
    }
    return pts;
}

inline Point target_point(std::int64_t upsilon, std::int64_t m) {
    if (!is_prime(m)) throw std::invalid_argument("target_point: m must be prime");
    if (upsilon < 0 || upsilon >= m) throw std::invalid_argument("target_point: upsilon out of range");
    return {(upsilon * upsilon) % m, upsilon};
}

// --------------------------------------------------------- frame inference

// Reference-frame pattern: a visible B entry b0 with a visible B entry at
// b0+(1,1) and a visible B entry at b0+(1,k) for some k >= 3; then the frame
// origin is b0 and m = k+1. For goal-placed robots the pattern is unique:
// (i+1)^2 - i^2 = 1 (mod m) forces i = 0, so only the origin robot has a
// placed robot diagonally adjacent at (1,1).
inline EvalContext derive_context(const LocalView& view, int* frameCandidates = nullptr) {
    EvalContext ctx;
    int candidates = 0;
    Point origin{};
    std::int64_t k = 0;
    for (const auto& b0 : view.entries) {
        if (b0.color != Color::B) continue;
        bool diag = false;
        for (const auto& e : view.entries)
            if (e.color == Color::B && e.pos == b0.pos + Point{1, 1}) diag = true;
        if (!diag) continue;
        for (const auto& e : view.entries) {
            if (e.color != Color::B) continue;
            // A real frame always spans a prime m = k+1, so non-prime spans
            // are coincidences and are filtered out locally.
            if (e.pos.x == b0.pos.x + 1 && e.pos.y >= b0.pos.y + 3 &&
                is_prime(e.pos.y - b0.pos.y + 1)) {
                ++candidates;
                origin = b0.pos;
                k = e.pos.y - b0.pos.y;
            }
        }
    }
    if (frameCandidates) *frameCandidates = candidates;
    if (candidates == 1) {
        ctx.lookCS = true;
        ctx.frameM = k + 1;
        ctx.myLocation = Point{-origin.x, -origin.y};
        ctx.upsilon = ctx.myLocation->y;
    } else if (view.entries.size() + 1 >= 2) {
        ctx.mHat = smallest_prime_geq(static_cast<std::int64_t>(view.entries.size()) + 1);
    }
    return ctx;
}

// ------------------------------------------------------- builtin rule set

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string default_rules_dir() {
    if (const char* env = std::getenv("GRIDVIS_RULES")) return env;
    return GRIDVIS_RULES_DIR;
}

// cv26.rules with the cv26.errata overlay applied (by rule name).
inline RuleSet load_ruleset_with_errata(const std::string& rulesPath,
                                        const std::string& errataPath) {
    RuleSet rs = parse_ruleset(read_text_file(rulesPath));
    std::ifstream probe(errataPath);
    if (probe) {
        RuleSet overlay = parse_ruleset(read_text_file(errataPath));
        for (const auto& patch : overlay.rules) {
            bool found = false;
            for (auto& r : rs.rules)
                if (r.name == patch.name) {
                    r = patch;
                    found = true;
                }
            if (!found) throw std::runtime_error("errata patches unknown rule " + patch.name);
        }
    }
    return rs;
}

inline RuleSet builtin_ruleset(const std::string& dir = default_rules_dir()) {
    RuleSet rs = load_ruleset_with_errata(dir + "/cv26.rules", dir + "/cv26.errata");
    if (rs.rules.size() != 26)
        throw std::runtime_error("builtin ruleset: expected 26 rules, got " +
                                 std::to_string(rs.rules.size()));
    for (std::size_t i = 0; i < 26; ++i)
        if (rs.rules[i].name != "R" + std::to_string(i + 1))
            throw std::runtime_error("builtin ruleset: rule " + std::to_string(i + 1) +
                                     " misnamed as " + rs.rules[i].name);
    return rs;
}

// Phase of a builtin rule (1-based rule number): 15/8/3 partition.
inline int builtin_phase(int ruleNumber) {
    if (ruleNumber <= 15) return 1;
    if (ruleNumber <= 23) return 2;
    return 3;
}

// The builtin algorithm is presented only for n >= 4. Mixed colors are fine:
// a run may resume from any intermediate milestone configuration.
inline void validate_builtin_start(const Configuration& config) {
    if (config.size() < 4)
        throw std::invalid_argument("builtin ruleset requires n >= 4 robots");
    if (!config.positions_distinct())
        throw std::invalid_argument("robot positions must be distinct");
}

// ---------------------------------------------------------- classifiers
// Exact global predicates; diagnostics only, never visible to robots.

namespace detail {

inline bool mutually_visible(const Configuration& c, Point a, Point b) {
    for (const auto& r : c.robots)
        if (blocks(a, b, r.pos)) return false;
    return true;
}

inline bool classify_ca(const Configuration& c) {
    const RobotRecord* b = nullptr;
    for (const auto& r : c.robots) {
        if (r.color != Color::B) continue;
        if (b) return false;
        b = &r;
    }
    if (!b) return false;
    for (const auto& r : c.robots) {
        if (r.id == b->id) continue;
        if (!(b->pos.y < r.pos.y && b->pos.x > r.pos.x)) return false;
    }
    return true;
}

inline bool classify_cb(const Configuration& c) {
    std::vector<const RobotRecord*> bs;
    std::int64_t minAy = 0;
    bool haveA = false;
    for (const auto& r : c.robots) {
        if (r.color == Color::B)
            bs.push_back(&r);
        else {
            minAy = haveA ? std::min(minAy, r.pos.y) : r.pos.y;
            haveA = true;
        }
    }
    if (bs.size() != 2) return false;
    if (bs[0]->pos.x != bs[1]->pos.x) return false;
    if (!mutually_visible(c, bs[0]->pos, bs[1]->pos)) return false;
    if (haveA && (bs[0]->pos.y > minAy || bs[1]->pos.y > minAy)) return false;
    return true;
}

inline bool classify_cc(const Configuration& c) {
    if (c.size() < 3) return false;
    std::int64_t x0 = c.robots[0].pos.x;
    const RobotRecord *lo = &c.robots[0], *hi = &c.robots[0];
    for (const auto& r : c.robots) {
        if (r.pos.x != x0) return false;
        if (r.pos.y < lo->pos.y) lo = &r;
        if (r.pos.y > hi->pos.y) hi = &r;
    }
    if (lo->color != Color::B || hi->color != Color::B) return false;
    for (const auto& r : c.robots)
        if (r.id != lo->id && r.id != hi->id && r.color != Color::A) return false;
    return true;
}

inline bool classify_cd(const Configuration& c) {
    std::int64_t x0 = c.robots[0].pos.x;
    std::int64_t ymin = c.robots[0].pos.y, ymax = ymin;
    for (const auto& r : c.robots) {
        if (r.pos.x != x0 || r.color != Color::B) return false;
        ymin = std::min(ymin, r.pos.y);
        ymax = std::max(ymax, r.pos.y);
    }
    return ymax - ymin + 1 == static_cast<std::int64_t>(c.size());
}

inline bool classify_ce(const Configuration& c) {
    std::int64_t n = static_cast<std::int64_t>(c.size());
    std::int64_t m = smallest_prime_geq(n);
    std::vector<const RobotRecord*> bs;
    for (const auto& r : c.robots)
        if (r.color == Color::B) bs.push_back(&r);
    if (bs.size() != 3) return false;
    const RobotRecord* origin = bs[0];
    for (const auto* b : bs)
        if (b->pos.y < origin->pos.y) origin = b;
    std::set<Point> bset;
    for (const auto* b : bs) bset.insert(b->pos - origin->pos);
    if (bset != std::set<Point>{{0, 0}, {1, 1}, {1, m - 1}}) return false;
    std::set<Point> aset;
    for (const auto& r : c.robots)
        if (r.color == Color::A) aset.insert(r.pos - origin->pos);
    std::set<Point> want;
    for (std::int64_t y = 2; y <= n - 2; ++y) want.insert({2, y});
    return aset == want;
}

inline bool classify_cf(const Configuration& c) {
    std::int64_t n = static_cast<std::int64_t>(c.size());
    std::int64_t m = smallest_prime_geq(n);
    const RobotRecord* origin = &c.robots[0];
    for (const auto& r : c.robots) {
        if (r.color != Color::B) return false;
        if (r.pos.y < origin->pos.y) origin = &r;
    }
    std::set<std::int64_t> iset;
    for (const auto& r : c.robots) {
        Point p = r.pos - origin->pos;
        if (p.y < 0 || p.y >= m) return false;
        if (!iset.insert(p.y).second) return false;  // i values must be distinct
        if (p.x != (p.y * p.y) % m) return false;
    }
    return true;
}

}  // namespace detail

inline Milestone classify(const Configuration& config) {
    if (config.size() < 4) throw std::invalid_argument("classify: n >= 4 required");
    if (detail::classify_cf(config)) return Milestone::C_F;
    if (detail::classify_ce(config)) return Milestone::C_E;
    if (detail::classify_cd(config)) return Milestone::C_D;
    if (detail::classify_cc(config)) return Milestone::C_C;
    if (detail::classify_cb(config)) return Milestone::C_B;
    if (detail::classify_ca(config)) return Milestone::C_A;
    return Milestone::None;
}

// FNV-1a over the canonical printed form; pins trace files to a rule set.
inline std::uint64_t ruleset_hash(const RuleSet& rs) {
    std::uint64_t h = 1469598103934665603ull;
    for (char ch : format_ruleset(rs)) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace gridvis
