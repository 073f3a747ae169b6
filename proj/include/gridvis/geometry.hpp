#pragma once

// Integer lattice geometry for opaque robots on an infinite grid.
// All coordinate math is exact (64-bit integers, cross products); there is
// no floating point anywhere in the core.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace gridvis {

using json = nlohmann::json;

struct Point {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;

    Point operator+(const Point& o) const { return {x + o.x, y + o.y}; }
    Point operator-(const Point& o) const { return {x - o.x, y - o.y}; }
};

enum class Color : std::uint8_t { A, B };

inline char color_char(Color c) { return c == Color::A ? 'A' : 'B'; }

inline Color color_from_char(char c) {
    if (c == 'A') return Color::A;
    if (c == 'B') return Color::B;
    throw std::invalid_argument(std::string("unknown color '") + c + "'");
}

// Simulator-only handle. Rules and views never see it.
using RobotId = std::uint32_t;

struct RobotRecord {
    RobotId id = 0;
    Point pos;
    Color color = Color::A;
};

struct Configuration {
    std::vector<RobotRecord> robots;

    std::size_t size() const { return robots.size(); }

    const RobotRecord* find(RobotId id) const {
        for (const auto& r : robots)
            if (r.id == id) return &r;
        return nullptr;
    }
    RobotRecord* find(RobotId id) {
        for (auto& r : robots)
            if (r.id == id) return &r;
        return nullptr;
    }

    bool occupied(Point p) const {
        for (const auto& r : robots)
            if (r.pos == p) return true;
        return false;
    }

    // At most one robot per grid point.
    bool positions_distinct() const {
        for (std::size_t i = 0; i < robots.size(); ++i)
            for (std::size_t j = i + 1; j < robots.size(); ++j)
                if (robots[i].pos == robots[j].pos) return false;
        return true;
    }
};

// Occlusion-filtered self-centered snapshot. (0,0) is the observer and is
// never an entry; the observer's own color travels separately.
struct ViewEntry {
    Point pos;  // relative to the observer
    Color color = Color::A;
    friend bool operator==(const ViewEntry&, const ViewEntry&) = default;
};

struct LocalView {
    std::vector<ViewEntry> entries;
    Color myColor = Color::A;
};

// Exact collinearity test: cross product of (p2-p1) and (p3-p1).
inline bool collinear(Point p1, Point p2, Point p3) {
    std::int64_t ax = p2.x - p1.x, ay = p2.y - p1.y;
    std::int64_t bx = p3.x - p1.x, by = p3.y - p1.y;
    return ax * by - ay * bx == 0;
}

// True iff c lies strictly inside the open segment a-b. Endpoints never
// block; a != b is required.
inline bool blocks(Point a, Point b, Point c) {
    if (!collinear(a, b, c)) return false;
    if (c == a || c == b) return false;
    // Collinear: c is interior iff it is between a and b on both axes.
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

// The Look operation: translation-only local snapshot with opaque robots.
inline LocalView visible_set(const Configuration& config, RobotId observerId) {
    const RobotRecord* obs = config.find(observerId);
    if (!obs) throw std::invalid_argument("visible_set: unknown observer id");

    LocalView view;
    view.myColor = obs->color;
    for (const auto& q : config.robots) {
        if (q.id == observerId) continue;
        bool blocked = false;
        for (const auto& r : config.robots) {
            if (r.id == observerId || r.id == q.id) continue;
            if (blocks(obs->pos, q.pos, r.pos)) {
                blocked = true;
                break;
            }
        }
        if (!blocked) view.entries.push_back({q.pos - obs->pos, q.color});
    }
    std::sort(view.entries.begin(), view.entries.end(),
              [](const ViewEntry& a, const ViewEntry& b) { return a.pos < b.pos; });
    return view;
}

// Maximum pairwise Manhattan distance (movement is axis-aligned unit steps).
inline std::int64_t diameter(const Configuration& config) {
    if (config.robots.empty()) throw std::invalid_argument("diameter: empty configuration");
    std::int64_t d = 0;
    for (std::size_t i = 0; i < config.robots.size(); ++i)
        for (std::size_t j = i + 1; j < config.robots.size(); ++j) {
            Point a = config.robots[i].pos, b = config.robots[j].pos;
            d = std::max(d, std::abs(a.x - b.x) + std::abs(a.y - b.y));
        }
    return d;
}

// Area of the smallest axis-aligned rectangle containing all robots,
// counted in grid cells.
inline std::int64_t bounding_area(const Configuration& config) {
    if (config.robots.empty()) throw std::invalid_argument("bounding_area: empty configuration");
    std::int64_t xmin = config.robots[0].pos.x, xmax = xmin;
    std::int64_t ymin = config.robots[0].pos.y, ymax = ymin;
    for (const auto& r : config.robots) {
        xmin = std::min(xmin, r.pos.x);
        xmax = std::max(xmax, r.pos.x);
        ymin = std::min(ymin, r.pos.y);
        ymax = std::max(ymax, r.pos.y);
    }
    return (xmax - xmin + 1) * (ymax - ymin + 1);
}

// --- canonical JSON interchange: {"robots":[{"x":..,"y":..,"color":"A"}...]}

inline json config_to_json(const Configuration& config) {
    json arr = json::array();
    for (const auto& r : config.robots)
        arr.push_back({{"x", r.pos.x}, {"y", r.pos.y}, {"color", std::string(1, color_char(r.color))}});
    return json{{"robots", arr}};
}

inline Configuration config_from_json(const json& j) {
    Configuration config;
    if (!j.contains("robots") || !j["robots"].is_array())
        throw std::invalid_argument("configuration json: missing \"robots\" array");
    RobotId next = 0;
    for (const auto& e : j["robots"]) {
        RobotRecord r;
        r.id = next++;
        r.pos = {e.at("x").get<std::int64_t>(), e.at("y").get<std::int64_t>()};
        std::string c = e.at("color").get<std::string>();
        if (c.size() != 1) throw std::invalid_argument("configuration json: bad color");
        r.color = color_from_char(c[0]);
        config.robots.push_back(r);
    }
    if (!config.positions_distinct())
        throw std::invalid_argument("configuration json: duplicate positions");
    return config;
}

}  // namespace gridvis
