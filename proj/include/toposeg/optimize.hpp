#pragma once

// Projected gradient descent on pixel values against the combined loss:
// pred <- clamp_[0,1](pred - step * grad). Demonstrates the effect of the
// topological terms without a network in the loop.

#include <vector>

#include "toposeg/losses.hpp"
#include "toposeg/metrics.hpp"

namespace toposeg
{

struct OptimizeStep
{
    std::size_t iter = 0;
    double total = 0.0;
    double bce = 0.0;
    double tc = 0.0;
    double ts = 0.0;
    std::size_t betti0_err = 0;
    std::size_t betti1_err = 0;
};

struct OptimizeResult
{
    GrayImage image;
    std::vector<OptimizeStep> history;  // iters + 1 entries; the last one describes the returned image
};

inline OptimizeResult optimize_pixels(const GrayImage& init, const GrayImage& gt, const LossConfig& cfg,
                                      const FeatureExtractor& fx, std::size_t iters, double step,
                                      double bin_threshold = 0.5)
{
    if (iters == 0)
        throw InvalidArgument("iters must be >= 1");
    if (!(step >= 0.0))
        throw InvalidArgument("step must be >= 0");
    require_same_shape(init, gt, "optimize");
    const BinaryMask gt_mask = threshold_mask(gt, 0.5);

    OptimizeResult out;
    GrayImage pred = init;
    for (std::size_t it = 0;; ++it)
    {
        TotalLoss loss = total_loss(pred, gt, cfg, fx);
        const BettiError be = betti_error(threshold_mask(pred, bin_threshold), gt_mask);
        out.history.push_back({it, loss.total.value, loss.bce, loss.tc, loss.ts, be.e0, be.e1});
        if (it == iters)
            break;
        if (step == 0.0)
            continue;
        Grid<double> next = pred.grid();
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] -= step * loss.total.gradient[i];
        pred = GrayImage::clamped(std::move(next));
    }
    out.image = std::move(pred);
    return out;
}

}  // namespace toposeg
