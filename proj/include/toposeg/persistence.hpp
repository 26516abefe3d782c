#pragma once

// Persistent homology of 2D grayscale images under the superlevel
// filtration: pixels enter in order of decreasing value (ties broken by
// row-major index). Foreground uses 8-adjacency, background 4-adjacency.
//
// Dimension 0 is computed with union-find and the elder rule. Dimension 1 is
// computed through duality: a hole of the foreground is a 4-connected
// background component that does not reach the image border, so holes are
// tracked by running union-find over the background in reverse entry order,
// with a virtual "outside" node adjacent to every border pixel.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "toposeg/image.hpp"

namespace toposeg
{

struct PersistencePair
{
    int dim = 0;
    double creation = 0.0;
    double destruction = 0.0;
    Cell creation_cell;
    std::optional<Cell> destruction_cell;
    bool essential = false;

    double persistence() const noexcept { return creation - destruction; }

    bool operator==(const PersistencePair&) const = default;
};

struct PersistenceDiagram
{
    std::vector<PersistencePair> pairs;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t count(int dim) const
    {
        return static_cast<std::size_t>(
            std::count_if(pairs.begin(), pairs.end(), [dim](const PersistencePair& p) { return p.dim == dim; }));
    }
};

/// Canonical order: dim asc, creation desc, row-major creation cell, then
/// destruction desc and destruction cell.
inline bool canonical_less(const PersistencePair& a, const PersistencePair& b)
{
    if (a.dim != b.dim)
        return a.dim < b.dim;
    if (a.creation != b.creation)
        return a.creation > b.creation;
    if (a.creation_cell != b.creation_cell)
        return a.creation_cell < b.creation_cell;
    if (a.destruction != b.destruction)
        return a.destruction > b.destruction;
    return a.destruction_cell < b.destruction_cell;
}

namespace detail
{

class UnionFind
{
public:
    explicit UnionFind(std::size_t n) : parent_(n), oldest_(n)
    {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
        std::iota(oldest_.begin(), oldest_.end(), std::uint32_t{0});
    }

    std::uint32_t find(std::uint32_t x)
    {
        std::uint32_t root = x;
        while (parent_[root] != root)
            root = parent_[root];
        while (parent_[x] != root)
            x = std::exchange(parent_[x], root);
        return root;
    }

    /// Attaches `child` root under `parent` root.
    void attach(std::uint32_t child, std::uint32_t parent) { parent_[child] = parent; }

    /// Creation element (pixel index) of the class rooted at `root`.
    std::uint32_t oldest(std::uint32_t root) const { return oldest_[root]; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> oldest_;
};

/// Pixel indices sorted by (value desc, index asc).
inline std::vector<std::uint32_t> entry_order(const GrayImage& img)
{
    std::vector<std::uint32_t> order(img.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    const auto values = img.values();
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    });
    return order;
}

}  // namespace detail

/// Full persistence diagram (dimensions 0 and 1) of the superlevel filtration.
/// Pairs with zero persistence are omitted.
inline PersistenceDiagram compute_diagram(const GrayImage& img)
{
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const std::size_t n = img.size();
    const auto values = img.values();

    PersistenceDiagram diagram;
    diagram.height = h;
    diagram.width = w;

    const std::vector<std::uint32_t> order = detail::entry_order(img);
    std::vector<std::uint32_t> rank(n);
    for (std::uint32_t pos = 0; pos < n; ++pos)
        rank[order[pos]] = pos;

    auto cell = [w](std::uint32_t idx) { return Cell{idx / w, idx % w}; };

    // Dimension 0: foreground components, 8-adjacency, elder = smaller rank.
    {
        detail::UnionFind uf(n);
        std::vector<std::uint8_t> present(n, 0);
        std::array<std::uint32_t, 8> roots{};
        for (std::uint32_t pos = 0; pos < n; ++pos)
        {
            const std::uint32_t p = order[pos];
            const std::size_t r = p / w;
            const std::size_t c = p % w;
            std::size_t nroots = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                {
                    if (dr == 0 && dc == 0)
                        continue;
                    const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
                    const auto cc = static_cast<std::ptrdiff_t>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h) ||
                        cc >= static_cast<std::ptrdiff_t>(w))
                        continue;
                    const auto q = static_cast<std::uint32_t>(rr * static_cast<std::ptrdiff_t>(w) + cc);
                    if (!present[q])
                        continue;
                    const std::uint32_t root = uf.find(q);
                    if (std::find(roots.begin(), roots.begin() + nroots, root) == roots.begin() + nroots)
                        roots[nroots++] = root;
                }
            present[p] = 1;
            if (nroots == 0)
                continue;  // p starts a new component (its own root)

            std::uint32_t elder = roots[0];
            for (std::size_t i = 1; i < nroots; ++i)
                if (rank[uf.oldest(roots[i])] < rank[uf.oldest(elder)])
                    elder = roots[i];
            for (std::size_t i = 0; i < nroots; ++i)
            {
                if (roots[i] == elder)
                    continue;
                const std::uint32_t born = uf.oldest(roots[i]);
                if (values[born] != values[p])
                    diagram.pairs.push_back({0, values[born], values[p], cell(born), cell(p), false});
                uf.attach(roots[i], elder);
            }
            uf.attach(p, elder);
        }
        const std::uint32_t first = order[0];
        diagram.pairs.push_back({0, values[first], 0.0, cell(first), std::nullopt, true});
    }

    // Dimension 1: background components in reverse order, 4-adjacency.
    // Node n is the outside, older than every pixel.
    {
        const std::uint32_t outside = static_cast<std::uint32_t>(n);
        detail::UnionFind uf(n + 1);
        std::vector<std::uint8_t> present(n + 1, 0);
        present[outside] = 1;
        auto reverse_age = [&](std::uint32_t idx) -> std::uint64_t {
            // Larger = born earlier in the reverse sweep.
            return idx == outside ? std::uint64_t{n} : std::uint64_t{rank[idx]};
        };
        std::array<std::uint32_t, 5> roots{};
        for (std::size_t step = n; step-- > 0;)
        {
            const std::uint32_t p = order[step];
            const std::size_t r = p / w;
            const std::size_t c = p % w;
            std::size_t nroots = 0;
            auto visit = [&](std::uint32_t q) {
                if (!present[q])
                    return;
                const std::uint32_t root = uf.find(q);
                if (std::find(roots.begin(), roots.begin() + nroots, root) == roots.begin() + nroots)
                    roots[nroots++] = root;
            };
            if (r == 0 || c == 0 || r + 1 == h || c + 1 == w)
                visit(outside);
            if (r > 0)
                visit(p - static_cast<std::uint32_t>(w));
            if (r + 1 < h)
                visit(p + static_cast<std::uint32_t>(w));
            if (c > 0)
                visit(p - 1);
            if (c + 1 < w)
                visit(p + 1);
            present[p] = 1;
            if (nroots == 0)
                continue;

            std::uint32_t elder = roots[0];
            for (std::size_t i = 1; i < nroots; ++i)
                if (reverse_age(uf.oldest(roots[i])) > reverse_age(uf.oldest(elder)))
                    elder = roots[i];
            for (std::size_t i = 0; i < nroots; ++i)
            {
                if (roots[i] == elder)
                    continue;
                // Forward view: p's entry splits off this hole; the hole's
                // first reverse pixel is the last one to be filled.
                const std::uint32_t filler = uf.oldest(roots[i]);
                if (values[p] != values[filler])
                    diagram.pairs.push_back({1, values[p], values[filler], cell(p), cell(filler), false});
                uf.attach(roots[i], elder);
            }
            uf.attach(p, elder);
        }
    }

    std::sort(diagram.pairs.begin(), diagram.pairs.end(), canonical_less);
    return diagram;
}

struct BettiNumbers
{
    std::size_t b0 = 0;
    std::size_t b1 = 0;

    bool operator==(const BettiNumbers&) const = default;
};

/// b0: 8-connected foreground components. b1: 4-connected background
/// components not touching the border.
inline BettiNumbers betti_numbers(const BinaryMask& mask)
{
    const std::size_t h = mask.height();
    const std::size_t w = mask.width();
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<std::size_t> stack;
    BettiNumbers out;

    for (std::size_t start = 0; start < mask.size(); ++start)
    {
        if (seen[start])
            continue;
        const bool fg = mask[start] != 0;
        bool touches_border = false;
        seen[start] = 1;
        stack.assign(1, start);
        while (!stack.empty())
        {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t r = p / w;
            const std::size_t c = p % w;
            if (r == 0 || c == 0 || r + 1 == h || c + 1 == w)
                touches_border = true;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                {
                    if (dr == 0 && dc == 0)
                        continue;
                    if (!fg && dr != 0 && dc != 0)
                        continue;
                    const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
                    const auto cc = static_cast<std::ptrdiff_t>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<std::ptrdiff_t>(h) ||
                        cc >= static_cast<std::ptrdiff_t>(w))
                        continue;
                    const auto q = static_cast<std::size_t>(rr) * w + static_cast<std::size_t>(cc);
                    if (seen[q] || (mask[q] != 0) != fg)
                        continue;
                    seen[q] = 1;
                    stack.push_back(q);
                }
        }
        if (fg)
            ++out.b0;
        else if (!touches_border)
            ++out.b1;
    }
    return out;
}

struct BettiCurve
{
    std::vector<double> thresholds;  // distinct pixel values, descending
    std::vector<BettiNumbers> counts;
};

inline BettiCurve betti_curve(const GrayImage& img)
{
    std::vector<double> levels(img.values().begin(), img.values().end());
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    BettiCurve curve;
    curve.thresholds = levels;
    curve.counts.reserve(levels.size());
    for (double t : levels)
        curve.counts.push_back(betti_numbers(threshold_mask(img, t)));
    return curve;
}

/// Number of dim-`dim` pairs alive at threshold t: created at or above t and
/// not yet destroyed (essential pairs never die).
inline std::size_t alive_count(const PersistenceDiagram& diagram, int dim, double t)
{
    return static_cast<std::size_t>(std::count_if(diagram.pairs.begin(), diagram.pairs.end(), [&](const auto& p) {
        return p.dim == dim && p.creation >= t && (p.essential || p.destruction < t);
    }));
}

}  // namespace toposeg
