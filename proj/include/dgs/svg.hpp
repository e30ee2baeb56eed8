// Copyright 2026 DGS contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dgs {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Self-contained SVG line chart: axes, ticks, one polyline per series and a
// legend. Output is a pure function of the inputs.
std::string render_line_chart(const std::vector<Series>& series, const std::string& x_label,
                              const std::string& y_label, int width = 640, int height = 420);

}  // namespace dgs
