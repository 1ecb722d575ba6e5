#pragma once

#include <string>
#include <vector>

#include "qsrevents/vec.hpp"

namespace qsrev {

struct PlotTrace {
  std::string name;
  std::vector<Vec2> pts;
};

// One square panel with equal-aspect axes, tick labels, and a legend line
// per trace. Traces draw as polylines with a hollow start dot and a filled
// end dot, so a stationary trace still shows up as a point cluster.
struct PlotPanel {
  std::string title;
  std::vector<PlotTrace> traces;
};

// Standalone SVG document, panels laid out left to right. Output is fully
// deterministic for identical input.
std::string render_panels(const std::vector<PlotPanel>& panels,
                          int panel_px = 420);

}  // namespace qsrev
