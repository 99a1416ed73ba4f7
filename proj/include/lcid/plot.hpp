#pragma once

#include <string>
#include <vector>

namespace lcid {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal static SVG line chart (one polyline + legend entry per series).
void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y);

}  // namespace lcid
