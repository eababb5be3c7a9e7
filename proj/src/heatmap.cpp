#include "fenestra/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include <png.h>

namespace fenestra {

HeatmapText render_heatmap_text(const Eigen::VectorXd& values, int rows, int cols, int bins,
                                int max_rows, int max_cols) {
    if (values.size() == 0 || rows < 1 || cols < 1)
        throw std::invalid_argument("render_heatmap_text: empty map");
    if (values.size() != static_cast<Eigen::Index>(rows) * cols)
        throw std::invalid_argument("render_heatmap_text: map size does not match grid shape");
    if (bins < 1 || bins > 10) throw std::invalid_argument("render_heatmap_text: bins must be in [1,10]");

    const int out_rows = std::min(rows, max_rows);
    const int out_cols = std::min(cols, max_cols);
    Eigen::MatrixXd cells(out_rows, out_cols);
    for (int r = 0; r < out_rows; ++r) {
        const int r0 = r * rows / out_rows, r1 = (r + 1) * rows / out_rows;
        for (int c = 0; c < out_cols; ++c) {
            const int c0 = c * cols / out_cols, c1 = (c + 1) * cols / out_cols;
            double sum = 0;
            for (int rr = r0; rr < r1; ++rr)
                for (int cc = c0; cc < c1; ++cc) sum += values(rr * cols + cc);
            cells(r, c) = sum / ((r1 - r0) * (c1 - c0));
        }
    }

    HeatmapText out;
    out.rows = out_rows;
    out.cols = out_cols;
    out.min_value = cells.minCoeff();
    out.max_value = cells.maxCoeff();
    const double span = out.max_value - out.min_value;
    for (int r = 0; r < out_rows; ++r) {
        for (int c = 0; c < out_cols; ++c) {
            int bin = bins / 2;
            if (span > 0) {
                bin = static_cast<int>(std::floor((cells(r, c) - out.min_value) / span * bins));
                bin = std::clamp(bin, 0, bins - 1);
            }
            out.grid.push_back(static_cast<char>('0' + bin));
        }
        if (r + 1 < out_rows) out.grid.push_back('\n');
    }
    return out;
}

RgbImage::RgbImage(int w, int h, std::uint8_t fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

void RgbImage::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
}

std::array<std::uint8_t, 3> colormap(double t) {
    // Piecewise-linear approximation of viridis.
    static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84},
                                                                {59, 82, 139},
                                                                {33, 145, 140},
                                                                {94, 201, 98},
                                                                {253, 231, 37}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    std::array<std::uint8_t, 3> rgb{};
    for (int k = 0; k < 3; ++k)
        rgb[k] = static_cast<std::uint8_t>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
    return rgb;
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y) {
        auto* row = const_cast<png_bytep>(image.pixels.data() + static_cast<std::size_t>(y) * image.width * 3);
        png_write_row(png, row);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RgbImage render_heatmap_image(const Eigen::VectorXd& values, int rows, int cols, int cell) {
    if (values.size() != static_cast<Eigen::Index>(rows) * cols || values.size() == 0)
        throw std::invalid_argument("render_heatmap_image: map size does not match grid shape");
    const double lo = values.minCoeff(), hi = values.maxCoeff();
    RgbImage img(cols * cell, rows * cell);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double t = hi > lo ? (values(r * cols + c) - lo) / (hi - lo) : 0.5;
            const auto rgb = colormap(t);
            for (int dy = 0; dy < cell; ++dy)
                for (int dx = 0; dx < cell; ++dx) img.set(c * cell + dx, r * cell + dy, rgb[0], rgb[1], rgb[2]);
        }
    return img;
}

}  // namespace fenestra
