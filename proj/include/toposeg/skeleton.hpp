#pragma once

// Topology-preserving thinning (8-connected foreground, 4-connected
// background). Border pixels are peeled in four directional sub-passes;
// each candidate is re-tested against the current image before deletion, so
// every deletion removes a simple point and Betti numbers never change.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "toposeg/image.hpp"

namespace toposeg
{

namespace detail
{

// Ring order: N, NE, E, SE, S, SW, W, NW.
inline constexpr std::array<int, 8> kRingRow = {-1, -1, 0, 1, 1, 1, 0, -1};
inline constexpr std::array<int, 8> kRingCol = {0, 1, 1, 1, 0, -1, -1, -1};

inline std::size_t ring_components(unsigned code, bool foreground)
{
    std::array<bool, 8> seen{};
    std::size_t comps = 0;
    for (int s = 0; s < 8; ++s)
    {
        const bool in = ((code >> s) & 1u) != 0;
        if (in != foreground || seen[s])
            continue;
        // Background components only count when they reach a 4-neighbour of p.
        std::array<int, 8> stack{};
        int top = 0;
        stack[top++] = s;
        seen[s] = true;
        bool touches_p = false;
        while (top > 0)
        {
            const int a = stack[--top];
            if (a % 2 == 0)
                touches_p = true;
            for (int b = 0; b < 8; ++b)
            {
                const bool bin = ((code >> b) & 1u) != 0;
                if (seen[b] || bin != foreground)
                    continue;
                const int dr = std::abs(kRingRow[a] - kRingRow[b]);
                const int dc = std::abs(kRingCol[a] - kRingCol[b]);
                const bool adjacent = foreground ? (dr <= 1 && dc <= 1) : (dr + dc == 1);
                if (adjacent)
                {
                    seen[b] = true;
                    stack[top++] = b;
                }
            }
        }
        if (foreground || touches_p)
            ++comps;
    }
    return comps;
}

/// simple[code] for the 8-neighbourhood bit pattern `code`.
inline const std::array<bool, 256>& simple_point_table()
{
    static const std::array<bool, 256> table = [] {
        std::array<bool, 256> t{};
        for (unsigned code = 0; code < 256; ++code)
            t[code] = ring_components(code, true) == 1 && ring_components(code, false) == 1;
        return t;
    }();
    return table;
}

inline unsigned neighbourhood_code(const BinaryMask& m, std::size_t r, std::size_t c)
{
    unsigned code = 0;
    for (int s = 0; s < 8; ++s)
    {
        const auto rr = static_cast<std::ptrdiff_t>(r) + kRingRow[s];
        const auto cc = static_cast<std::ptrdiff_t>(c) + kRingCol[s];
        if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(m.height()) ||
            cc >= static_cast<std::ptrdiff_t>(m.width()))
            continue;
        if (m(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)))
            code |= 1u << s;
    }
    return code;
}

inline bool deletable(const BinaryMask& m, std::size_t r, std::size_t c)
{
    const unsigned code = neighbourhood_code(m, r, c);
    // Endpoints are kept so branches do not erode back to a point.
    return std::popcount(code) >= 2 && simple_point_table()[code];
}

}  // namespace detail

/// Thins foreground to a one-pixel-wide skeleton with the same b0 and b1.
inline BinaryMask skeletonize(BinaryMask mask)
{
    // Sub-pass order: N, S, E, W border pixels (ring slots 0, 4, 2, 6).
    static constexpr std::array<int, 4> kDirections = {0, 4, 2, 6};
    std::vector<std::size_t> candidates;
    bool changed = true;
    while (changed)
    {
        changed = false;
        for (int dir : kDirections)
        {
            candidates.clear();
            for (std::size_t r = 0; r < mask.height(); ++r)
                for (std::size_t c = 0; c < mask.width(); ++c)
                {
                    if (!mask(r, c))
                        continue;
                    const unsigned code = detail::neighbourhood_code(mask, r, c);
                    if ((code >> dir) & 1u)
                        continue;
                    if (detail::deletable(mask, r, c))
                        candidates.push_back(r * mask.width() + c);
                }
            for (std::size_t idx : candidates)
            {
                const std::size_t r = idx / mask.width();
                const std::size_t c = idx % mask.width();
                if (detail::deletable(mask, r, c))
                {
                    mask(r, c) = 0;
                    changed = true;
                }
            }
        }
    }
    return mask;
}

}  // namespace toposeg
