#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fenestra {

/// Character raster of a grid map, one digit per cell, min-max binned.
struct HeatmapText {
    int rows = 0;
    int cols = 0;
    std::string grid;  // rows separated by '\n', first row nearest the facade
    double min_value = 0.0;
    double max_value = 0.0;
};

/// Bins a row-major grid map into `bins` levels on a raster of at most
/// max_cols x max_rows cells (block averages when the grid is larger). A
/// constant map renders every cell as bins / 2.
HeatmapText render_heatmap_text(const Eigen::VectorXd& values, int rows, int cols, int bins = 10,
                                int max_rows = 10, int max_cols = 20);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // RGB, row-major

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t fill = 255);
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

/// Perceptually ordered colour ramp, t in [0, 1].
std::array<std::uint8_t, 3> colormap(double t);

void write_png(const RgbImage& image, const std::filesystem::path& path);

/// One square of `cell` pixels per grid point, coloured by min-max value.
RgbImage render_heatmap_image(const Eigen::VectorXd& values, int rows, int cols, int cell = 16);

}  // namespace fenestra
