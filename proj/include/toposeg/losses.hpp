#pragma once

// Segmentation losses with analytic gradients w.r.t. the prediction:
// persistent topological loss, perceptual topological loss, pixel-wise BCE,
// and their weighted sum.

#include <cmath>
#include <utility>

#include "toposeg/feature_extractor.hpp"
#include "toposeg/matching.hpp"

namespace toposeg
{

struct LossResult
{
    double value = 0.0;
    Grid<double> gradient;
};

struct LossConfig
{
    double lambda_tc = 0.05;
    double lambda_ts = 0.0002;
    MatchConfig match;

    void validate() const
    {
        if (!(lambda_tc >= 0.0) || !(lambda_ts >= 0.0))
            throw InvalidArgument("loss weights must be >= 0");
        match.validate();
    }
};

struct SatLoss
{
    LossResult loss;
    PersistenceDiagram pred_diagram;
    PersistenceDiagram gt_diagram;
    DiagramMatching matching;
};

/// Persistent topological loss. The matching and critical cells are computed
/// once and then treated as constant: coordinates b = 1 - value(creation cell)
/// and d = 1 - value(destruction cell) are read from the images, so the loss
/// is a quadratic in the prediction's critical pixels.
inline SatLoss sat_loss(const GrayImage& pred, const GrayImage& gt, const MatchConfig& cfg = {})
{
    require_same_shape(pred, gt, "sat_loss");
    SatLoss out;
    out.pred_diagram = compute_diagram(pred);
    out.gt_diagram = compute_diagram(gt);
    out.matching = match_diagrams(out.pred_diagram, out.gt_diagram, cfg);

    Grid<double> grad(pred.height(), pred.width(), 0.0);
    double value = 0.0;
    for (const Matching& m : out.matching.dims)
        for (const Assignment& a : m.assignments)
        {
            const PersistencePair& p = out.pred_diagram.pairs[a.pred];
            const double s = a.weight;
            const double b = 1.0 - pred(p.creation_cell);
            const double d = p.essential ? 1.0 : 1.0 - pred(*p.destruction_cell);
            if (a.gt)
            {
                const PersistencePair& t = out.gt_diagram.pairs[*a.gt];
                const double bt = 1.0 - gt(t.creation_cell);
                const double dt = t.essential ? 1.0 : 1.0 - gt(*t.destruction_cell);
                value += s * ((b - bt) * (b - bt) + (d - dt) * (d - dt));
                grad(p.creation_cell) += -2.0 * s * (b - bt);
                if (!p.essential)
                    grad(*p.destruction_cell) += -2.0 * s * (d - dt);
            }
            else
            {
                // Target is the projection ((b+d)/2, (b+d)/2).
                value += 0.5 * s * (b - d) * (b - d);
                grad(p.creation_cell) += -s * (b - d);
                grad(*p.destruction_cell) += s * (b - d);
            }
        }
    out.loss = {value, std::move(grad)};
    return out;
}

/// Sum over tapped stages of the squared L2 distance between feature maps.
inline LossResult perceptual_topo_loss(const GrayImage& pred, const GrayImage& gt, const FeatureExtractor& fx)
{
    require_same_shape(pred, gt, "perceptual_topo_loss");
    const auto pred_trace = fx.forward(pred);
    const auto gt_trace = fx.forward(gt);

    double value = 0.0;
    std::vector<FeatureMap> grads;
    grads.reserve(fx.stages().size());
    for (std::size_t s = 0; s < fx.stages().size(); ++s)
    {
        const FeatureMap& a = pred_trace[s].output;
        FeatureMap g(a.channels, a.height, a.width);
        if (fx.stages()[s].tap)
        {
            const FeatureMap& b = gt_trace[s].output;
            for (std::size_t i = 0; i < a.data.size(); ++i)
            {
                const double diff = a.data[i] - b.data[i];
                value += diff * diff;
                g.data[i] = 2.0 * diff;
            }
        }
        grads.push_back(std::move(g));
    }
    return {value, fx.backward(pred_trace, std::move(grads))};
}

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy (negated log-likelihood, so >= 0). Predictions
/// are clamped into [eps, 1-eps]; the gradient is 0 where clamping applied.
inline LossResult bce_loss(const GrayImage& pred, const GrayImage& gt)
{
    require_same_shape(pred, gt, "bce_loss");
    if (!is_binary(gt))
        throw InvalidArgument("bce_loss: ground truth must be binary");
    const double n = static_cast<double>(pred.size());
    Grid<double> grad(pred.height(), pred.width(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
    {
        const double raw = pred[i];
        const double x = std::clamp(raw, kBceEpsilon, 1.0 - kBceEpsilon);
        const double y = gt[i];
        sum += y * std::log(x) + (1.0 - y) * std::log(1.0 - x);
        if (x == raw)
            grad[i] = -(y / x - (1.0 - y) / (1.0 - x)) / n;
    }
    return {-sum / n, std::move(grad)};
}

struct TotalLoss
{
    LossResult total;
    double bce = 0.0;
    double tc = 0.0;
    double ts = 0.0;
};

/// bce + lambda_tc * tc + lambda_ts * ts. Every component is evaluated and
/// reported, including those with zero weight.
inline TotalLoss total_loss(const GrayImage& pred, const GrayImage& gt, const LossConfig& cfg,
                            const FeatureExtractor& fx)
{
    cfg.validate();
    TotalLoss out;
    LossResult bce = bce_loss(pred, gt);
    out.bce = bce.value;
    Grid<double> grad = std::move(bce.gradient);
    double value = out.bce;

    {
        const LossResult tc = perceptual_topo_loss(pred, gt, fx);
        out.tc = tc.value;
        value += cfg.lambda_tc * tc.value;
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] += cfg.lambda_tc * tc.gradient[i];
    }
    {
        const SatLoss ts = sat_loss(pred, gt, cfg.match);
        out.ts = ts.loss.value;
        value += cfg.lambda_ts * ts.loss.value;
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] += cfg.lambda_ts * ts.loss.gradient[i];
    }
    out.total = {value, std::move(grad)};
    return out;
}

}  // namespace toposeg
