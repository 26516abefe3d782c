#pragma once

// Spatially-weighted Wasserstein matching between persistence diagrams.
//
// A predicted point p matched to a target point t costs
//     s(p,t) * |(b,d)(p) - (b,d)(t)|^q,   s(p,t) = (|cell(p) - cell(t)| / diag)^q
// where cells are creation cells and diag the image diagonal (or 1 when
// normalisation is off). A point sent to the diagonal costs
//     diagonal_weight * |(b,d)(p) - proj(p)|^q.
// Only predicted points are charged; unmatched target points fall on the
// diagonal for free.

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "toposeg/assignment.hpp"
#include "toposeg/persistence.hpp"

namespace toposeg
{

/// Diagram coordinates: birth = 1 - creation, death = 1 - destruction.
struct DiagramPoint
{
    double birth = 0.0;
    double death = 0.0;
    Cell creation_cell;
    int dim = 0;
    bool essential = false;

    static DiagramPoint from_pair(const PersistencePair& p)
    {
        return {1.0 - p.creation, 1.0 - p.destruction, p.creation_cell, p.dim, p.essential};
    }
};

struct Diagonal
{
};
inline constexpr Diagonal diagonal{};

struct MatchConfig
{
    double q = 2.0;
    double diagonal_weight = 1.0;
    /// Divide creation-cell distances by the image diagonal.
    bool normalize_spatial = true;
    /// Lower bound applied to point-to-point spatial weights.
    double weight_floor = 0.0;
    /// Image diagonal length in pixels; <= 0 means "derive from the diagrams".
    double image_diagonal = 0.0;

    void validate() const
    {
        if (!(q >= 1.0))
            throw InvalidArgument("q must be >= 1");
        if (!(diagonal_weight >= 0.0))
            throw InvalidArgument("diagonal_weight must be >= 0");
        if (!(weight_floor >= 0.0))
            throw InvalidArgument("weight_floor must be >= 0");
    }
};

inline double image_diagonal(std::size_t height, std::size_t width)
{
    return std::hypot(static_cast<double>(height), static_cast<double>(width));
}

struct PairCost
{
    double cost = 0.0;
    double weight = 0.0;
};

/// Closest point of the diagonal.
inline std::pair<double, double> diagonal_projection(const DiagramPoint& p)
{
    const double mid = 0.5 * (p.birth + p.death);
    return {mid, mid};
}

inline PairCost pair_cost(const DiagramPoint& p, const DiagramPoint& target, const MatchConfig& cfg)
{
    if (p.dim != target.dim || p.essential != target.essential)
        throw InvalidArgument("pair_cost: dimension or essential flag mismatch");
    const double dr = static_cast<double>(p.creation_cell.row) - static_cast<double>(target.creation_cell.row);
    const double dc = static_cast<double>(p.creation_cell.col) - static_cast<double>(target.creation_cell.col);
    double spatial = std::hypot(dr, dc);
    if (cfg.normalize_spatial)
    {
        if (!(cfg.image_diagonal > 0.0))
            throw InvalidArgument("pair_cost: spatial normalisation needs a positive image diagonal");
        spatial /= cfg.image_diagonal;
    }
    const double weight = std::max(std::pow(spatial, cfg.q), cfg.weight_floor);
    const double dist = std::hypot(p.birth - target.birth, p.death - target.death);
    return {weight * std::pow(dist, cfg.q), weight};
}

inline PairCost pair_cost(const DiagramPoint& p, Diagonal, const MatchConfig& cfg)
{
    // |(b,d) - proj|_2 = |d - b| / sqrt(2)
    const double dist = std::abs(p.death - p.birth) / std::sqrt(2.0);
    return {cfg.diagonal_weight * std::pow(dist, cfg.q), cfg.diagonal_weight};
}

struct Assignment
{
    std::size_t pred = 0;           // index into the predicted diagram's pairs
    std::optional<std::size_t> gt;  // index into the target diagram's pairs; empty = diagonal
    double weight = 0.0;
    double cost = 0.0;

    bool operator==(const Assignment&) const = default;
};

struct Matching
{
    int dim = 0;
    std::vector<Assignment> assignments;  // sorted by pred index
    std::vector<std::size_t> unmatched_gt;
    double total_cost = 0.0;
};

struct DiagramMatching
{
    std::array<Matching, 2> dims;
    double total_cost = 0.0;
};

namespace detail
{

inline Matching match_dimension(const PersistenceDiagram& pred, const PersistenceDiagram& gt, int dim,
                                const MatchConfig& cfg)
{
    std::vector<std::size_t> pred_free, gt_free, pred_ess, gt_ess;
    for (std::size_t i = 0; i < pred.pairs.size(); ++i)
        if (pred.pairs[i].dim == dim)
            (pred.pairs[i].essential ? pred_ess : pred_free).push_back(i);
    for (std::size_t j = 0; j < gt.pairs.size(); ++j)
        if (gt.pairs[j].dim == dim)
            (gt.pairs[j].essential ? gt_ess : gt_free).push_back(j);
    if (pred_ess.size() != gt_ess.size())
        throw InvalidArgument("match_diagrams: diagrams disagree on the number of essential classes");

    Matching m;
    m.dim = dim;
    for (std::size_t k = 0; k < pred_ess.size(); ++k)
    {
        const PairCost pc = pair_cost(DiagramPoint::from_pair(pred.pairs[pred_ess[k]]),
                                      DiagramPoint::from_pair(gt.pairs[gt_ess[k]]), cfg);
        m.assignments.push_back({pred_ess[k], gt_ess[k], pc.weight, pc.cost});
    }

    // Augmented square problem. Rows: predicted points, then one diagonal
    // slot per target point. Columns: target points, then one diagonal slot
    // per predicted point.
    const std::size_t n = pred_free.size();
    const std::size_t k = gt_free.size();
    Grid<double> cost(n + k, n + k, 0.0);
    std::vector<DiagramPoint> pp(n), gp(k);
    for (std::size_t i = 0; i < n; ++i)
        pp[i] = DiagramPoint::from_pair(pred.pairs[pred_free[i]]);
    for (std::size_t j = 0; j < k; ++j)
        gp[j] = DiagramPoint::from_pair(gt.pairs[gt_free[j]]);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < k; ++j)
            cost(i, j) = pair_cost(pp[i], gp[j], cfg).cost;
        const double to_diag = pair_cost(pp[i], diagonal, cfg).cost;
        for (std::size_t j = k; j < n + k; ++j)
            cost(i, j) = to_diag;
    }

    const std::vector<std::size_t> col = solve_assignment(cost);
    std::vector<std::uint8_t> gt_taken(k, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (col[i] < k)
        {
            const PairCost pc = pair_cost(pp[i], gp[col[i]], cfg);
            m.assignments.push_back({pred_free[i], gt_free[col[i]], pc.weight, pc.cost});
            gt_taken[col[i]] = 1;
        }
        else
        {
            const PairCost pc = pair_cost(pp[i], diagonal, cfg);
            m.assignments.push_back({pred_free[i], std::nullopt, pc.weight, pc.cost});
        }
    }
    for (std::size_t j = 0; j < k; ++j)
        if (!gt_taken[j])
            m.unmatched_gt.push_back(gt_free[j]);

    std::sort(m.assignments.begin(), m.assignments.end(),
              [](const Assignment& a, const Assignment& b) { return a.pred < b.pred; });
    for (const Assignment& a : m.assignments)
        m.total_cost += a.cost;
    return m;
}

}  // namespace detail

/// Optimal matching per homology dimension. Essential classes are paired
/// with essential classes; all other points by exact assignment with
/// diagonal slots on both sides.
inline DiagramMatching match_diagrams(const PersistenceDiagram& pred, const PersistenceDiagram& gt,
                                      MatchConfig cfg = {})
{
    cfg.validate();
    if (pred.height != gt.height || pred.width != gt.width)
        throw DimensionMismatch("match_diagrams: diagrams come from differently sized images");
    if (cfg.normalize_spatial && !(cfg.image_diagonal > 0.0))
        cfg.image_diagonal = image_diagonal(pred.height, pred.width);

    DiagramMatching out;
    for (int dim = 0; dim < 2; ++dim)
    {
        out.dims[dim] = detail::match_dimension(pred, gt, dim, cfg);
        out.total_cost += out.dims[dim].total_cost;
    }
    return out;
}

}  // namespace toposeg
