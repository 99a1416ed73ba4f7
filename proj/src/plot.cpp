#include "lcid/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lcid {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string tick_label(double v, bool log_scale) {
    std::ostringstream s;
    if (log_scale) {
        s << "1e" << fmt(v);
    } else {
        s.precision(4);
        s << v;
    }
    return s.str();
}

}  // namespace

void write_svg_line_chart(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_y) {
    constexpr double width = 760, height = 480;
    constexpr double left = 80, right = 180, top = 50, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const auto& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (std::isnan(y)) continue;
            if (log_y) {
                if (!(y > 0.0)) continue;
                y = std::log10(y);
            }
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!(x_min <= x_max)) throw std::invalid_argument("write_svg_line_chart: no finite data");
    if (x_min == x_max) { x_min -= 1; x_max += 1; }
    if (y_min == y_max) { y_min -= 1; y_max += 1; }

    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) {
        if (log_y) y = std::log10(y);
        return top + (y_max - y) / (y_max - y_min) * plot_h;
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << width / 2 << "' y='28' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";

    // axes and ticks
    out << "<rect x='" << left << "' y='" << top << "' width='" << plot_w << "' height='"
        << plot_h << "' fill='none' stroke='black'/>\n";
    constexpr int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double xv = x_min + (x_max - x_min) * i / n_ticks;
        const double yv = y_min + (y_max - y_min) * i / n_ticks;
        out << "<line x1='" << sx(xv) << "' y1='" << top + plot_h << "' x2='" << sx(xv)
            << "' y2='" << top + plot_h + 5 << "' stroke='black'/>\n"
            << "<text x='" << sx(xv) << "' y='" << top + plot_h + 20
            << "' text-anchor='middle' font-size='11'>" << tick_label(xv, false) << "</text>\n";
        const double py = top + plot_h - i * plot_h / n_ticks;
        out << "<line x1='" << left - 5 << "' y1='" << py << "' x2='" << left << "' y2='" << py
            << "' stroke='black'/>\n"
            << "<text x='" << left - 8 << "' y='" << py + 4
            << "' text-anchor='end' font-size='11'>" << tick_label(yv, log_y) << "</text>\n";
    }
    out << "<text x='" << left + plot_w / 2 << "' y='" << height - 15
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
        << "<text x='20' y='" << top + plot_h / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 20 " << top + plot_h / 2
        << ")'>" << y_label << "</text>\n";

    size_t color_idx = 0;
    double legend_y = top + 10;
    for (const auto& s : series) {
        const char* color = kPalette[color_idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
        ++color_idx;
        out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.y[i]) || (log_y && !(s.y[i] > 0.0))) continue;
            out << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i])) << " ";
        }
        out << "'/>\n";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (std::isnan(s.y[i]) || (log_y && !(s.y[i] > 0.0))) continue;
            out << "<circle cx='" << fmt(sx(s.x[i])) << "' cy='" << fmt(sy(s.y[i]))
                << "' r='3' fill='" << color << "'/>\n";
        }
        out << "<line x1='" << left + plot_w + 12 << "' y1='" << legend_y << "' x2='"
            << left + plot_w + 34 << "' y2='" << legend_y << "' stroke='" << color
            << "' stroke-width='1.5'/>\n"
            << "<text x='" << left + plot_w + 40 << "' y='" << legend_y + 4
            << "' font-size='11'>" << s.label << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace lcid
