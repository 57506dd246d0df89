#pragma once

#include <string>
#include <vector>

namespace alilab {

// Minimal deterministic SVG plotting: fixed panel geometry, fixed-precision
// coordinates, no timestamps — identical inputs give identical bytes.

struct PlotSeries {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    double radius = 1.4;
    double opacity = 0.6;
};

// Line segments (e.g. a point joined to its reconstruction).
struct PlotSegments {
    std::vector<double> x0, y0, x1, y1;
    std::string color = "#b0b0b0";
    double width = 0.6;
};

// Circles in data coordinates (density contours of isotropic components).
struct PlotCircles {
    std::vector<double> cx, cy, r;
    std::string color = "#d62728";
    double width = 0.8;
};

struct Panel {
    std::string title;
    double xmin = -1.5, xmax = 1.5, ymin = -1.5, ymax = 1.5;
    std::vector<PlotSeries> scatters;
    std::vector<PlotSegments> segments;
    std::vector<PlotCircles> circles;
    std::string empty_caption = "no points"; // shown when nothing plots
};

// Lay panels out in a grid with n_cols columns (row-major order).
std::string render_svg(const std::vector<Panel>& panels, int n_cols, const std::string& title);

} // namespace alilab
