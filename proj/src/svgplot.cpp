#include "qsrevents/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

const char* kPalette[8] = {"#4878cf", "#d65f5f", "#6acc65", "#956cb4",
                           "#c4ad66", "#77bedb", "#8c613c", "#dc7ec0"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Bounds {
  double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
};

Bounds panel_bounds(const PlotPanel& p) {
  Bounds b;
  bool any = false;
  for (const PlotTrace& tr : p.traces)
    for (const Vec2& v : tr.pts) {
      if (!any) {
        b = {v.x, v.x, v.y, v.y};
        any = true;
      } else {
        b.lo_x = std::min(b.lo_x, v.x);
        b.hi_x = std::max(b.hi_x, v.x);
        b.lo_y = std::min(b.lo_y, v.y);
        b.hi_y = std::max(b.hi_y, v.y);
      }
    }
  // pad 5%, and give degenerate spans a visible extent
  double span = std::max(b.hi_x - b.lo_x, b.hi_y - b.lo_y);
  if (span <= 0.0) span = 1.0;
  const double pad = 0.05 * span;
  b.lo_x -= pad;
  b.hi_x += pad;
  b.lo_y -= pad;
  b.hi_y += pad;
  return b;
}

}  // namespace

std::string render_panels(const std::vector<PlotPanel>& panels, int panel_px) {
  if (panels.empty()) throw InvalidInput("render_panels: no panels");
  if (panel_px < 100) throw InvalidInput("render_panels: panel too small");

  const int margin = 46;       // room for tick labels on the left/bottom
  const int header = 24;       // panel title
  const int legend_row = 16;
  std::size_t max_traces = 0;
  for (const PlotPanel& p : panels)
    max_traces = std::max(max_traces, p.traces.size());
  const int legend_h = static_cast<int>(max_traces) * legend_row + 8;
  const int cell_w = panel_px + margin + 16;
  const int cell_h = panel_px + margin + header + legend_h;
  const int width = cell_w * static_cast<int>(panels.size());
  const int height = cell_h;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const PlotPanel& p = panels[pi];
    const Bounds b = panel_bounds(p);
    const double ox = pi * cell_w + margin;   // plot box origin
    const double oy = header;
    // equal aspect: one scale for both axes, centered in the box
    const double span_x = b.hi_x - b.lo_x;
    const double span_y = b.hi_y - b.lo_y;
    const double scale = panel_px / std::max(span_x, span_y);
    const double off_x = ox + (panel_px - span_x * scale) / 2.0;
    const double off_y = oy + (panel_px - span_y * scale) / 2.0;
    auto map_x = [&](double x) { return off_x + (x - b.lo_x) * scale; };
    auto map_y = [&](double y) { return off_y + (b.hi_y - y) * scale; };

    svg += "<text x=\"" + num(ox + panel_px / 2.0) + "\" y=\"16\" " +
           "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
           " font-weight=\"bold\">" +
           esc(p.title) + "</text>\n";
    svg += "<rect x=\"" + num(ox) + "\" y=\"" + num(oy) + "\" width=\"" +
           std::to_string(panel_px) + "\" height=\"" +
           std::to_string(panel_px) +
           "\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n";

    // ticks on the data range, 4 intervals
    for (int k = 0; k <= 4; ++k) {
      const double fx = b.lo_x + span_x * k / 4.0;
      const double fy = b.lo_y + span_y * k / 4.0;
      const double px = map_x(fx);
      const double py = map_y(fy);
      if (px >= ox - 0.5 && px <= ox + panel_px + 0.5) {
        svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(oy + panel_px) +
               "\" x2=\"" + num(px) + "\" y2=\"" + num(oy + panel_px + 4) +
               "\" stroke=\"#888\"/>\n";
        svg += "<text x=\"" + num(px) + "\" y=\"" + num(oy + panel_px + 16) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"10\">" +
               num(fx) + "</text>\n";
      }
      if (py >= oy - 0.5 && py <= oy + panel_px + 0.5) {
        svg += "<line x1=\"" + num(ox - 4) + "\" y1=\"" + num(py) +
               "\" x2=\"" + num(ox) + "\" y2=\"" + num(py) +
               "\" stroke=\"#888\"/>\n";
        svg += "<text x=\"" + num(ox - 6) + "\" y=\"" + num(py + 3) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"10\">" +
               num(fy) + "</text>\n";
      }
    }

    for (std::size_t ti = 0; ti < p.traces.size(); ++ti) {
      const PlotTrace& tr = p.traces[ti];
      const char* color = kPalette[ti % 8];
      if (tr.pts.size() > 1) {
        std::string pts;
        for (const Vec2& v : tr.pts) {
          if (!pts.empty()) pts += ' ';
          pts += num(map_x(v.x)) + "," + num(map_y(v.y));
        }
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
               color + "\" stroke-width=\"1.5\" stroke-opacity=\"0.85\"/>\n";
      }
      if (!tr.pts.empty()) {
        const Vec2& s = tr.pts.front();
        const Vec2& e = tr.pts.back();
        svg += "<circle cx=\"" + num(map_x(s.x)) + "\" cy=\"" +
               num(map_y(s.y)) + "\" r=\"3\" fill=\"white\" stroke=\"" +
               color + "\" stroke-width=\"1.5\"/>\n";
        svg += "<circle cx=\"" + num(map_x(e.x)) + "\" cy=\"" +
               num(map_y(e.y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
      }
      // legend
      const double ly = oy + panel_px + 28 + ti * legend_row;
      svg += "<line x1=\"" + num(ox) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
             num(ox + 18) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      svg += "<text x=\"" + num(ox + 24) + "\" y=\"" + num(ly) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" +
             esc(tr.name) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace qsrev
