#pragma once

#include <cmath>

#include "toposeg/toposeg.hpp"

namespace fixtures
{

using toposeg::GrayImage;
using toposeg::Grid;

/// 3x3: border 0.8, centre 0.2.
inline GrayImage toy_ring()
{
    return GrayImage(3, 3, {0.8, 0.8, 0.8, 0.8, 0.2, 0.8, 0.8, 0.8, 0.8});
}

/// Annulus centred in a side x side image, inner radius r0, outer r1.
inline bool in_annulus(std::size_t r, std::size_t c, std::size_t side, double r0, double r1)
{
    const double cy = 0.5 * static_cast<double>(side - 1);
    const double dy = static_cast<double>(r) - cy;
    const double dx = static_cast<double>(c) - cy;
    const double rad = std::sqrt(dy * dy + dx * dx);
    return rad >= r0 && rad <= r1;
}

/// Binary 32x32 ring.
inline GrayImage ring32()
{
    Grid<double> g(32, 32, 0.0);
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c)
            if (in_annulus(r, c, 32, 8.0, 11.0))
                g(r, c) = 1.0;
    return GrayImage(std::move(g));
}

/// The ring with a gap cut through its bottom: ring pixels in columns
/// 14..17 below the centre are set to `gap_value`.
inline GrayImage ring32_with_gap(double gap_value = 0.3)
{
    Grid<double> g = ring32().grid();
    for (std::size_t r = 16; r < 32; ++r)
        for (std::size_t c = 14; c <= 17; ++c)
            if (g(r, c) == 1.0)
                g(r, c) = gap_value;
    return GrayImage(std::move(g));
}

}  // namespace fixtures
