#include "alilab/svg.hpp"

#include <cstdio>
#include <sstream>

#include "alilab/error.hpp"

namespace alilab {

namespace {

constexpr double kPanelSize = 260.0;
constexpr double kPad = 14.0;      // gap between panels
constexpr double kTitleBand = 26.0; // per-panel title strip
constexpr double kHeader = 30.0;    // figure title strip

std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

struct Mapper {
    double px, py; // panel top-left (plot area)
    double xmin, xmax, ymin, ymax;

    bool contains(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
    double sx(double x) const { return px + (x - xmin) / (xmax - xmin) * kPanelSize; }
    double sy(double y) const { return py + (ymax - y) / (ymax - ymin) * kPanelSize; }
};

} // namespace

std::string render_svg(const std::vector<Panel>& panels, int n_cols, const std::string& title) {
    if (n_cols < 1) throw ContractError("render_svg: n_cols must be >= 1");
    if (panels.empty()) throw ContractError("render_svg: panel list is empty");
    const int n = static_cast<int>(panels.size());
    const int rows = (n + n_cols - 1) / n_cols;
    const double cell_w = kPanelSize + kPad;
    const double cell_h = kPanelSize + kTitleBand + kPad;
    const double width = kPad + n_cols * cell_w;
    const double height = kHeader + kPad + rows * cell_h;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f2(width) << "\" height=\""
      << f2(height) << "\" viewBox=\"0 0 " << f2(width) << " " << f2(height) << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << f2(width) << "\" height=\"" << f2(height)
      << "\" fill=\"#ffffff\"/>\n";
    o << "<text x=\"" << f2(kPad) << "\" y=\"" << f2(kHeader - 10.0)
      << "\" font-family=\"sans-serif\" font-size=\"15\" fill=\"#222222\">" << escape_xml(title)
      << "</text>\n";

    for (int i = 0; i < n; ++i) {
        const Panel& panel = panels[static_cast<std::size_t>(i)];
        if (!(panel.xmax > panel.xmin) || !(panel.ymax > panel.ymin))
            throw ContractError("render_svg: panel '" + panel.title + "' has an empty range");
        const int r = i / n_cols;
        const int c = i % n_cols;
        const double ox = kPad + c * cell_w;
        const double oy = kHeader + kPad + r * cell_h;
        Mapper map{ox, oy + kTitleBand, panel.xmin, panel.xmax, panel.ymin, panel.ymax};

        o << "<text x=\"" << f2(ox) << "\" y=\"" << f2(oy + kTitleBand - 9.0)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444444\">"
          << escape_xml(panel.title) << "</text>\n";
        o << "<rect x=\"" << f2(map.px) << "\" y=\"" << f2(map.py) << "\" width=\""
          << f2(kPanelSize) << "\" height=\"" << f2(kPanelSize)
          << "\" fill=\"#fafafa\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";

        std::size_t drawn = 0;
        for (const PlotCircles& set : panel.circles) {
            if (set.cx.size() != set.cy.size() || set.cx.size() != set.r.size())
                throw ContractError("render_svg: circle arrays disagree in length");
            o << "<g fill=\"none\" stroke=\"" << set.color << "\" stroke-width=\""
              << f2(set.width) << "\" stroke-opacity=\"0.8\">\n";
            const double per_unit = kPanelSize / (panel.xmax - panel.xmin);
            for (std::size_t k = 0; k < set.cx.size(); ++k) {
                if (!map.contains(set.cx[k], set.cy[k])) continue;
                o << "<circle cx=\"" << f2(map.sx(set.cx[k])) << "\" cy=\"" << f2(map.sy(set.cy[k]))
                  << "\" r=\"" << f2(set.r[k] * per_unit) << "\"/>\n";
                ++drawn;
            }
            o << "</g>\n";
        }
        for (const PlotSegments& set : panel.segments) {
            if (set.x0.size() != set.y0.size() || set.x0.size() != set.x1.size() ||
                set.x0.size() != set.y1.size())
                throw ContractError("render_svg: segment arrays disagree in length");
            o << "<g stroke=\"" << set.color << "\" stroke-width=\"" << f2(set.width) << "\">\n";
            for (std::size_t k = 0; k < set.x0.size(); ++k) {
                if (!map.contains(set.x0[k], set.y0[k]) || !map.contains(set.x1[k], set.y1[k]))
                    continue;
                o << "<line x1=\"" << f2(map.sx(set.x0[k])) << "\" y1=\"" << f2(map.sy(set.y0[k]))
                  << "\" x2=\"" << f2(map.sx(set.x1[k])) << "\" y2=\"" << f2(map.sy(set.y1[k]))
                  << "\"/>\n";
                ++drawn;
            }
            o << "</g>\n";
        }
        for (const PlotSeries& set : panel.scatters) {
            if (set.x.size() != set.y.size())
                throw ContractError("render_svg: scatter arrays disagree in length");
            o << "<g fill=\"" << set.color << "\" fill-opacity=\"" << f2(set.opacity) << "\">\n";
            for (std::size_t k = 0; k < set.x.size(); ++k) {
                if (!map.contains(set.x[k], set.y[k])) continue;
                o << "<circle cx=\"" << f2(map.sx(set.x[k])) << "\" cy=\"" << f2(map.sy(set.y[k]))
                  << "\" r=\"" << f2(set.radius) << "\"/>\n";
                ++drawn;
            }
            o << "</g>\n";
        }
        if (drawn == 0)
            o << "<text x=\"" << f2(map.px + kPanelSize / 2) << "\" y=\""
              << f2(map.py + kPanelSize / 2)
              << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#999999\" "
                 "text-anchor=\"middle\">"
              << escape_xml(panel.empty_caption) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace alilab
