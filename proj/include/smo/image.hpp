#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "smo/errors.hpp"

namespace smo {

/// Row-major grayscale raster with intensities in [0,1].
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    static GrayImage filled(int w, int h, double value) {
        return GrayImage{w, h, std::vector<double>(std::size_t(w) * h, value)};
    }

    double& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::size_t pixels() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Row-major raster of class indices in {0, ..., num_classes-1}.
struct MaskImage {
    int width = 0;
    int height = 0;
    int num_classes = 2;
    std::vector<std::uint8_t> data;

    static MaskImage filled(int w, int h, std::uint8_t value, int classes = 2) {
        return MaskImage{w, h, classes, std::vector<std::uint8_t>(std::size_t(w) * h, value)};
    }

    std::uint8_t& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    std::size_t pixels() const { return data.size(); }

    bool operator==(const MaskImage&) const = default;
};

inline int clamp_coord(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

/// Bilinear resampling; an identity when the size is unchanged.
inline GrayImage bilinear_resize(const GrayImage& src, int w, int h) {
    if (src.width <= 0 || src.height <= 0) throw InvalidParams("bilinear_resize: empty image");
    GrayImage dst = GrayImage::filled(w, h, 0.0);
    const double sx = double(src.width) / w;
    const double sy = double(src.height) / h;
    for (int y = 0; y < h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = clamp_coord(int(std::floor(fy)), src.height);
        const int y1 = clamp_coord(y0 + 1, src.height);
        const double ty = std::clamp(fy - std::floor(fy), 0.0, 1.0);
        for (int x = 0; x < w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = clamp_coord(int(std::floor(fx)), src.width);
            const int x1 = clamp_coord(x0 + 1, src.width);
            const double tx = std::clamp(fx - std::floor(fx), 0.0, 1.0);
            const double top = src.at(x0, y0) * (1.0 - tx) + src.at(x1, y0) * tx;
            const double bot = src.at(x0, y1) * (1.0 - tx) + src.at(x1, y1) * tx;
            dst.at(x, y) = top * (1.0 - ty) + bot * ty;
        }
    }
    return dst;
}

/// Nearest-neighbour resampling; preserves the label set.
inline MaskImage nearest_resize(const MaskImage& src, int w, int h) {
    if (src.width <= 0 || src.height <= 0) throw InvalidParams("nearest_resize: empty mask");
    MaskImage dst = MaskImage::filled(w, h, 0, src.num_classes);
    const double sx = double(src.width) / w;
    const double sy = double(src.height) / h;
    for (int y = 0; y < h; ++y) {
        const int yy = clamp_coord(int(std::floor((y + 0.5) * sy)), src.height);
        for (int x = 0; x < w; ++x) {
            const int xx = clamp_coord(int(std::floor((x + 0.5) * sx)), src.width);
            dst.at(x, y) = src.at(xx, yy);
        }
    }
    return dst;
}

/// Mean over a replicate-padded (2r+1) box, applied separably.
inline GrayImage box_filter(const GrayImage& img, int radius) {
    if (radius < 0) throw InvalidParams("box_filter: negative radius");
    if (radius == 0) return img;
    const int w = img.width, h = img.height;
    const double inv = 1.0 / (2 * radius + 1);
    GrayImage tmp = GrayImage::filled(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int d = -radius; d <= radius; ++d) s += img.at(clamp_coord(x + d, w), y);
            tmp.at(x, y) = s * inv;
        }
    GrayImage out = GrayImage::filled(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int d = -radius; d <= radius; ++d) s += tmp.at(x, clamp_coord(y + d, h));
            out.at(x, y) = s * inv;
        }
    return out;
}

/// 3x3 median with replicate padding.
inline GrayImage median3x3(const GrayImage& img) {
    GrayImage out = GrayImage::filled(img.width, img.height, 0.0);
    double window[9];
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    window[n++] = img.at(clamp_coord(x + dx, img.width),
                                         clamp_coord(y + dy, img.height));
            std::nth_element(window, window + 4, window + 9);
            out.at(x, y) = window[4];
        }
    return out;
}

inline double image_mean(const GrayImage& img) {
    double s = 0.0;
    for (const double v : img.data) s += v;
    return s / double(img.pixels());
}

inline double image_variance(const GrayImage& img) {
    const double m = image_mean(img);
    double s = 0.0;
    for (const double v : img.data) s += (v - m) * (v - m);
    return s / double(img.pixels());
}

}  // namespace smo
