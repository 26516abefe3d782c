#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "toposeg/error.hpp"
#include "toposeg/grid.hpp"

namespace toposeg
{

/// Foreground = 1, background = 0.
using BinaryMask = Grid<std::uint8_t>;

/// Grayscale image with every intensity in [0, 1].
///
/// Immutable after construction; use `Grid<double>` for scratch buffers and
/// `GrayImage::clamped` to come back into image space.
class GrayImage
{
public:
    GrayImage() = default;

    GrayImage(std::size_t height, std::size_t width, double fill = 0.0)
        : GrayImage(Grid<double>(height, width, fill))
    {
    }

    GrayImage(std::size_t height, std::size_t width, std::vector<double> pixels)
        : GrayImage(Grid<double>(height, width, std::move(pixels)))
    {
    }

    explicit GrayImage(Grid<double> pixels) : pixels_(std::move(pixels))
    {
        if (pixels_.height() == 0 || pixels_.width() == 0)
            throw InvalidArgument("image must have at least one row and one column");
        for (double v : pixels_.values())
            if (!(v >= 0.0 && v <= 1.0))
                throw InvalidArgument("pixel value " + std::to_string(v) + " outside [0,1]");
    }

    /// Clamps every value into [0, 1]; NaN is rejected.
    static GrayImage clamped(Grid<double> values)
    {
        for (double& v : values.values())
        {
            if (std::isnan(v))
                throw InvalidArgument("NaN pixel value");
            v = std::clamp(v, 0.0, 1.0);
        }
        return GrayImage(std::move(values));
    }

    std::size_t height() const noexcept { return pixels_.height(); }
    std::size_t width() const noexcept { return pixels_.width(); }
    std::size_t size() const noexcept { return pixels_.size(); }

    double operator()(std::size_t r, std::size_t c) const { return pixels_(r, c); }
    double operator()(Cell cell) const { return pixels_(cell); }
    double operator[](std::size_t i) const { return pixels_[i]; }

    std::span<const double> values() const noexcept { return pixels_.values(); }
    const Grid<double>& grid() const noexcept { return pixels_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return pixels_.same_shape(other);
    }
    bool same_shape(const GrayImage& other) const noexcept { return pixels_.same_shape(other.pixels_); }

    bool operator==(const GrayImage&) const = default;

private:
    Grid<double> pixels_;
};

inline void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what)
{
    require_same_shape(a.grid(), b.grid(), what);
}

/// Superlevel set: true where pixel >= t.
inline BinaryMask threshold_mask(const GrayImage& img, double t)
{
    if (!(t >= 0.0 && t <= 1.0))
        throw InvalidArgument("threshold outside [0,1]");
    BinaryMask mask(img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i)
        mask[i] = img[i] >= t ? 1 : 0;
    return mask;
}

/// Lifts a mask to a {0,1}-valued image.
inline GrayImage to_image(const BinaryMask& mask)
{
    if (mask.empty())
        throw InvalidArgument("empty mask");
    Grid<double> g(mask.height(), mask.width());
    for (std::size_t i = 0; i < mask.size(); ++i)
        g[i] = mask[i] ? 1.0 : 0.0;
    return GrayImage(std::move(g));
}

inline bool is_binary(const GrayImage& img)
{
    return std::all_of(img.values().begin(), img.values().end(),
                       [](double v) { return v == 0.0 || v == 1.0; });
}

/// Zero-pads to a square (odd remainder goes bottom/right).
inline GrayImage pad_to_square(const GrayImage& img)
{
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const std::size_t side = std::max(h, w);
    const std::size_t top = (side - h) / 2;
    const std::size_t left = (side - w) / 2;
    Grid<double> out(side, side, 0.0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out(r + top, c + left) = img(r, c);
    return GrayImage(std::move(out));
}

/// Bilinear resampling with corner-aligned sample positions: output pixel i
/// samples source coordinate i * (src - 1) / (dst - 1). A one-pixel target
/// samples the source centre.
inline GrayImage resize_bilinear(const GrayImage& img, std::size_t out_h, std::size_t out_w)
{
    if (out_h == 0 || out_w == 0)
        throw InvalidArgument("resize target must be at least 1x1");

    auto source_coord = [](std::size_t i, std::size_t src, std::size_t dst) {
        if (dst == 1)
            return 0.5 * static_cast<double>(src - 1);
        return static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
    };

    Grid<double> out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r)
    {
        const double y = source_coord(r, img.height(), out_h);
        const auto y0 = static_cast<std::size_t>(std::floor(y));
        const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
        const double fy = y - static_cast<double>(y0);
        for (std::size_t c = 0; c < out_w; ++c)
        {
            const double x = source_coord(c, img.width(), out_w);
            const auto x0 = static_cast<std::size_t>(std::floor(x));
            const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
            const double fx = x - static_cast<double>(x0);
            const double top = (1.0 - fx) * img(y0, x0) + fx * img(y0, x1);
            const double bottom = (1.0 - fx) * img(y1, x0) + fx * img(y1, x1);
            out(r, c) = (1.0 - fy) * top + fy * bottom;
        }
    }
    // Convex combinations stay in range up to rounding.
    return GrayImage::clamped(std::move(out));
}

inline GrayImage pad_and_resize(const GrayImage& img, std::size_t side)
{
    if (side == 0)
        throw InvalidArgument("side must be >= 1");
    GrayImage square = pad_to_square(img);
    if (square.height() == side)
        return square;
    return resize_bilinear(square, side, side);
}

}  // namespace toposeg
