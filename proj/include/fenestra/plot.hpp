#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fenestra/heatmap.hpp"

namespace fenestra {

using Rgb = std::array<std::uint8_t, 3>;

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// 5x7 bitmap text; lowercase renders as uppercase, unknown glyphs as blanks.
void draw_text(RgbImage& image, int x, int y, const std::string& text, Rgb colour, int scale = 1);
void draw_line(RgbImage& image, int x0, int y0, int x1, int y1, Rgb colour);

/// Line chart with axes, tick labels and a legend. Non-finite points are
/// skipped.
RgbImage render_line_plot(const std::vector<Series>& series, const std::string& title,
                          const std::string& x_label, const std::string& y_label, int width = 800,
                          int height = 500);

}  // namespace fenestra
