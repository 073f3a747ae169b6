#pragma once

// Static snapshot rendering: ASCII grids for terminals, SVG for reports.

#include <sstream>
#include <string>

#include "gridvis/geometry.hpp"

namespace gridvis {

// Rows printed top to bottom with y decreasing; robots as A/B, empty cells
// as '.', one column of padding between cells.
inline std::string render_ascii(const Configuration& config) {
    if (config.robots.empty()) return "";
    std::int64_t xmin = config.robots[0].pos.x, xmax = xmin;
    std::int64_t ymin = config.robots[0].pos.y, ymax = ymin;
    for (const auto& r : config.robots) {
        xmin = std::min(xmin, r.pos.x);
        xmax = std::max(xmax, r.pos.x);
        ymin = std::min(ymin, r.pos.y);
        ymax = std::max(ymax, r.pos.y);
    }
    std::ostringstream out;
    for (std::int64_t y = ymax; y >= ymin; --y) {
        for (std::int64_t x = xmin; x <= xmax; ++x) {
            char cell = '.';
            for (const auto& r : config.robots)
                if (r.pos.x == x && r.pos.y == y) cell = color_char(r.color);
            out << cell;
            if (x < xmax) out << ' ';
        }
        out << '\n';
    }
    return out.str();
}

inline std::string render_svg(const Configuration& config, int cellSize = 24) {
    std::int64_t xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    if (!config.robots.empty()) {
        xmin = xmax = config.robots[0].pos.x;
        ymin = ymax = config.robots[0].pos.y;
    }
    for (const auto& r : config.robots) {
        xmin = std::min(xmin, r.pos.x);
        xmax = std::max(xmax, r.pos.x);
        ymin = std::min(ymin, r.pos.y);
        ymax = std::max(ymax, r.pos.y);
    }
    std::int64_t cols = xmax - xmin + 1, rows = ymax - ymin + 1;
    std::int64_t w = (cols + 1) * cellSize, h = (rows + 1) * cellSize;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    for (std::int64_t x = xmin; x <= xmax; ++x) {
        std::int64_t gx = (x - xmin + 1) * cellSize;
        out << "  <line x1=\"" << gx << "\" y1=\"" << cellSize / 2 << "\" x2=\"" << gx
            << "\" y2=\"" << h - cellSize / 2 << "\" stroke=\"#ddd\"/>\n";
    }
    for (std::int64_t y = ymin; y <= ymax; ++y) {
        std::int64_t gy = (ymax - y + 1) * cellSize;
        out << "  <line x1=\"" << cellSize / 2 << "\" y1=\"" << gy << "\" x2=\"" << w - cellSize / 2
            << "\" y2=\"" << gy << "\" stroke=\"#ddd\"/>\n";
    }
    for (const auto& r : config.robots) {
        std::int64_t gx = (r.pos.x - xmin + 1) * cellSize;
        std::int64_t gy = (ymax - r.pos.y + 1) * cellSize;
        const char* fill = r.color == Color::A ? "#e2574c" : "#3a6ea5";
        out << "  <circle cx=\"" << gx << "\" cy=\"" << gy << "\" r=\"" << cellSize / 3
            << "\" fill=\"" << fill << "\"/>\n";
        out << "  <text x=\"" << gx << "\" y=\"" << gy + cellSize / 8
            << "\" text-anchor=\"middle\" font-size=\"" << cellSize / 2
            << "\" fill=\"white\" font-family=\"sans-serif\">" << color_char(r.color)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace gridvis
