#pragma once

// Segmentation evaluation: confusion-matrix rates, clDice and Betti errors.
// Every ratio with a zero denominator evaluates to 0, so no metric is NaN.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "toposeg/persistence.hpp"
#include "toposeg/skeleton.hpp"

namespace toposeg
{

struct Confusion
{
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

inline Confusion confusion(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_shape(pred, gt, "confusion");
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i)
    {
        const bool p = pred[i] != 0;
        const bool g = gt[i] != 0;
        if (p && g)
            ++c.tp;
        else if (p)
            ++c.fp;
        else if (g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

struct PixelMetrics
{
    double acc = 0.0;
    double dice = 0.0;
    double sp = 0.0;
    double se = 0.0;
    double pr = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
};

namespace detail
{
inline double ratio(double num, double den)
{
    return den == 0.0 ? 0.0 : num / den;
}
}  // namespace detail

inline PixelMetrics pixel_metrics(const Confusion& c)
{
    const auto tp = static_cast<double>(c.tp);
    const auto fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn);
    const auto fn = static_cast<double>(c.fn);
    PixelMetrics m;
    m.acc = detail::ratio(tp + tn, tp + fp + tn + fn);
    m.se = detail::ratio(tp, tp + fn);
    m.sp = detail::ratio(tn, tn + fp);
    m.pr = detail::ratio(tp, tp + fp);
    m.dice = detail::ratio(2.0 * tp, 2.0 * tp + fp + fn);
    m.f1 = m.dice;
    const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
    m.mcc = detail::ratio(tp * tn - fp * fn, den);
    return m;
}

inline std::size_t count_foreground(const BinaryMask& m)
{
    return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(), [](auto v) { return v != 0; }));
}

inline std::size_t count_overlap(const BinaryMask& a, const BinaryMask& b)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        n += (a[i] && b[i]) ? 1 : 0;
    return n;
}

/// Harmonic mean of skeleton precision (pred skeleton inside gt) and skeleton
/// sensitivity (gt skeleton inside pred).
inline double cldice(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_shape(pred, gt, "cldice");
    const BinaryMask skel_pred = skeletonize(pred);
    const BinaryMask skel_gt = skeletonize(gt);
    const std::size_t np = count_foreground(skel_pred);
    const std::size_t ng = count_foreground(skel_gt);
    if (np == 0 && ng == 0)
        return 1.0;
    if (np == 0 || ng == 0)
        return 0.0;
    const double tprec = static_cast<double>(count_overlap(skel_pred, gt)) / static_cast<double>(np);
    const double tsens = static_cast<double>(count_overlap(skel_gt, pred)) / static_cast<double>(ng);
    if (tprec + tsens == 0.0)
        return 0.0;
    return 2.0 * tprec * tsens / (tprec + tsens);
}

struct BettiError
{
    std::size_t e0 = 0;
    std::size_t e1 = 0;

    bool operator==(const BettiError&) const = default;
};

inline BettiError betti_error(const BinaryMask& pred, const BinaryMask& gt)
{
    require_same_shape(pred, gt, "betti_error");
    const BettiNumbers bp = betti_numbers(pred);
    const BettiNumbers bg = betti_numbers(gt);
    auto absdiff = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    return {absdiff(bp.b0, bg.b0), absdiff(bp.b1, bg.b1)};
}

inline BinaryMask crop(const BinaryMask& m, std::size_t r0, std::size_t c0, std::size_t h, std::size_t w)
{
    BinaryMask out(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c)
            out(r, c) = m(r0 + r, c0 + c);
    return out;
}

struct MeanBettiError
{
    double e0 = 0.0;
    double e1 = 0.0;
};

/// Betti errors averaged over non-overlapping tile x tile patches (edge
/// patches may be smaller).
inline MeanBettiError betti_error_tiled(const BinaryMask& pred, const BinaryMask& gt, std::size_t tile)
{
    require_same_shape(pred, gt, "betti_error_tiled");
    if (tile == 0)
        throw InvalidArgument("tile size must be >= 1");
    MeanBettiError out;
    std::size_t tiles = 0;
    for (std::size_t r = 0; r < pred.height(); r += tile)
        for (std::size_t c = 0; c < pred.width(); c += tile)
        {
            const std::size_t h = std::min(tile, pred.height() - r);
            const std::size_t w = std::min(tile, pred.width() - c);
            const BettiError e = betti_error(crop(pred, r, c, h, w), crop(gt, r, c, h, w));
            out.e0 += static_cast<double>(e.e0);
            out.e1 += static_cast<double>(e.e1);
            ++tiles;
        }
    out.e0 /= static_cast<double>(tiles);
    out.e1 /= static_cast<double>(tiles);
    return out;
}

struct MetricsRow
{
    std::string image;
    double acc = 0.0;
    double dice = 0.0;
    double sp = 0.0;
    double se = 0.0;
    double pr = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;
    double cldice = 0.0;
    double betti0_err = 0.0;
    double betti1_err = 0.0;
};

struct MetricsReport
{
    std::vector<MetricsRow> rows;
    MetricsRow mean;
};

struct EvalSample
{
    std::string id;
    GrayImage pred;
    BinaryMask gt;
};

struct EvalOptions
{
    double bin_threshold = 0.5;
    /// 0 = whole-image Betti errors, otherwise tile side for patch mode.
    std::size_t betti_tile = 0;
    std::size_t threads = 1;
};

inline MetricsRow evaluate_pair(const std::string& id, const BinaryMask& pred, const BinaryMask& gt,
                                std::size_t betti_tile = 0)
{
    if (!pred.same_shape(gt))
        throw DimensionMismatch("image '" + id + "': prediction and ground truth differ in size");
    const PixelMetrics pm = pixel_metrics(confusion(pred, gt));
    MetricsRow row;
    row.image = id;
    row.acc = pm.acc;
    row.dice = pm.dice;
    row.sp = pm.sp;
    row.se = pm.se;
    row.pr = pm.pr;
    row.f1 = pm.f1;
    row.mcc = pm.mcc;
    row.cldice = cldice(pred, gt);
    if (betti_tile == 0)
    {
        const BettiError e = betti_error(pred, gt);
        row.betti0_err = static_cast<double>(e.e0);
        row.betti1_err = static_cast<double>(e.e1);
    }
    else
    {
        const MeanBettiError e = betti_error_tiled(pred, gt, betti_tile);
        row.betti0_err = e.e0;
        row.betti1_err = e.e1;
    }
    return row;
}

inline MetricsRow mean_row(const std::vector<MetricsRow>& rows)
{
    MetricsRow m;
    m.image = "MEAN";
    if (rows.empty())
        return m;
    for (const MetricsRow& r : rows)
    {
        m.acc += r.acc;
        m.dice += r.dice;
        m.sp += r.sp;
        m.se += r.se;
        m.pr += r.pr;
        m.f1 += r.f1;
        m.mcc += r.mcc;
        m.cldice += r.cldice;
        m.betti0_err += r.betti0_err;
        m.betti1_err += r.betti1_err;
    }
    const auto n = static_cast<double>(rows.size());
    for (double* v : {&m.acc, &m.dice, &m.sp, &m.se, &m.pr, &m.f1, &m.mcc, &m.cldice, &m.betti0_err, &m.betti1_err})
        *v /= n;
    return m;
}

/// Binarises each prediction at `bin_threshold` and computes one row per
/// sample, in input order, plus the arithmetic mean row.
inline MetricsReport evaluate_dataset(const std::vector<EvalSample>& samples, const EvalOptions& opt = {})
{
    if (!(opt.bin_threshold >= 0.0 && opt.bin_threshold <= 1.0))
        throw InvalidArgument("bin_threshold outside [0,1]");
    for (const EvalSample& s : samples)
        if (!s.pred.same_shape(s.gt))
            throw DimensionMismatch("image '" + s.id + "': prediction and ground truth differ in size");

    MetricsReport report;
    report.rows.resize(samples.size());
    auto work = [&](std::size_t i) {
        const EvalSample& s = samples[i];
        report.rows[i] = evaluate_pair(s.id, threshold_mask(s.pred, opt.bin_threshold), s.gt, opt.betti_tile);
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, samples.size()));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < samples.size(); ++i)
            work(i);
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < samples.size(); i = next++)
                {
                    try
                    {
                        work(i);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
        pool.clear();
        if (failure)
            std::rethrow_exception(failure);
    }
    report.mean = mean_row(report.rows);
    return report;
}

}  // namespace toposeg
