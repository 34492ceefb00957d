#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mod2t/errors.hpp"

namespace mod2t {

// 8-bit grayscale frame, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw InvalidInput("GrayImage: non-positive dimensions");
    }

    bool empty() const { return data.empty(); }

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    bool same_size(const GrayImage& o) const { return width == o.width && height == o.height; }
};

// Bilinear sample at a real-valued position, clamping to the image border.
inline double sample_bilinear(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

// Dense single-channel float plane; working type for patches and pyramids.
struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    FloatImage() = default;
    FloatImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

inline FloatImage to_float(const GrayImage& img) {
    FloatImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i];
    return out;
}

inline double sample_bilinear(const FloatImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(x);
    const int y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img.at(x0, y0) * (1.0 - fx) + img.at(x1, y0) * fx;
    const double bot = img.at(x0, y1) * (1.0 - fx) + img.at(x1, y1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

// Bilinear resize of an arbitrary rectangular crop to (out_w, out_h).
// The crop is given in source pixel coordinates [x0, x0+w) x [y0, y0+h).
inline FloatImage resize_crop(const GrayImage& src, int x0, int y0, int w, int h,
                              int out_w, int out_h) {
    FloatImage out(out_w, out_h);
    for (int oy = 0; oy < out_h; ++oy) {
        // map output pixel centers into the crop
        const double sy = y0 + (oy + 0.5) * h / static_cast<double>(out_h) - 0.5;
        for (int ox = 0; ox < out_w; ++ox) {
            const double sx = x0 + (ox + 0.5) * w / static_cast<double>(out_w) - 0.5;
            out.at(ox, oy) = sample_bilinear(src, sx, sy);
        }
    }
    return out;
}

// 2x2 box-filter downsample, used to build registration pyramids.
inline FloatImage downsample_half(const FloatImage& src) {
    const int w = std::max(1, src.width / 2);
    const int h = std::max(1, src.height / 2);
    FloatImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int sx = 2 * x;
            const int sy = 2 * y;
            const int sx1 = std::min(sx + 1, src.width - 1);
            const int sy1 = std::min(sy + 1, src.height - 1);
            out.at(x, y) = 0.25 * (src.at(sx, sy) + src.at(sx1, sy) +
                                   src.at(sx, sy1) + src.at(sx1, sy1));
        }
    }
    return out;
}

}  // namespace mod2t
