#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "aoisched/experiment.hpp"

namespace aoisched {

/**
 * Self-contained SVG line chart of sweep results: one polyline per policy,
 * x = sweep variable, y = average AoI. Every marker carries a <title> with
 * the exact CSV-formatted value, so the chart can be cross-checked against
 * the table cell by cell. No external plotting dependency.
 */
inline std::string sweep_svg(const std::vector<SweepRow>& rows,
                             const std::string& x_label) {
    static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                     "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    constexpr double kWidth = 720, kHeight = 480;
    constexpr double kLeft = 64, kRight = 700, kTop = 24, kBottom = 432;

    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool first = true;
    for (const auto& row : rows) {
        if (row.failed) continue;
        series[row.policy].emplace_back(row.value, row.avg_aoi);
        if (first) {
            x_min = x_max = row.value;
            y_min = y_max = row.avg_aoi;
            first = false;
        } else {
            x_min = std::min(x_min, row.value);
            x_max = std::max(x_max, row.value);
            y_min = std::min(y_min, row.avg_aoi);
            y_max = std::max(y_max, row.avg_aoi);
        }
    }
    if (x_max == x_min) { x_min -= 1; x_max += 1; }
    if (y_max == y_min) { y_min -= 1; y_max += 1; }
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) {
        return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft);
    };
    auto sy = [&](double y) {
        return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop);
    };

    std::string svg = detail::strprintf(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
        "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight, kWidth, kHeight);
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes and ticks
    svg += detail::strprintf(
        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
        kBottom, kRight, kBottom);
    svg += detail::strprintf(
        "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
        kBottom, kLeft, kTop);
    constexpr int kTicks = 6;
    for (int i = 0; i < kTicks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / (kTicks - 1);
        const double fy = y_min + (y_max - y_min) * i / (kTicks - 1);
        svg += detail::strprintf(
            "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"black\"/>\n",
            sx(fx), kBottom, sx(fx), kBottom + 5);
        svg += detail::strprintf(
            "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%.4g</text>\n", sx(fx),
            kBottom + 18.0, fx);
        svg += detail::strprintf(
            "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"black\"/>\n",
            kLeft - 5, sy(fy), kLeft, sy(fy));
        svg += detail::strprintf(
            "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\" dy=\"4\">%.4g</text>\n",
            kLeft - 8.0, sy(fy), fy);
    }
    svg += detail::strprintf(
        "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
        (kLeft + kRight) / 2, kHeight - 10, x_label.c_str());
    svg += detail::strprintf(
        "<text x=\"16\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">"
        "avg AoI</text>\n",
        (kTop + kBottom) / 2, (kTop + kBottom) / 2);

    int color = 0;
    double legend_y = kTop + 8;
    for (auto& [policy, points] : series) {
        std::sort(points.begin(), points.end());
        const char* stroke = kPalette[color % 8];
        std::string path;
        for (const auto& [x, y] : points)
            path += detail::strprintf("%.2f,%.2f ", sx(x), sy(y));
        svg += detail::strprintf(
            "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"%s\"/>\n",
            stroke, path.c_str());
        for (const auto& [x, y] : points)
            svg += detail::strprintf(
                "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\">"
                "<title>%s,%g,%.6f</title></circle>\n",
                sx(x), sy(y), stroke, policy.c_str(), x, y);
        svg += detail::strprintf(
            "<rect x=\"%g\" y=\"%.2f\" width=\"12\" height=\"3\" fill=\"%s\"/>\n",
            kLeft + 12.0, legend_y, stroke);
        svg += detail::strprintf("<text x=\"%g\" y=\"%.2f\" dy=\"5\">%s</text>\n",
                                 kLeft + 30.0, legend_y, policy.c_str());
        legend_y += 16;
        ++color;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace aoisched
