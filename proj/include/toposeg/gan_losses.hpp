#pragma once

// Translation objectives of a least-squares CycleGAN, evaluated over
// caller-supplied generator and discriminator mappings. Pixel and score
// reductions use the mean.

#include <cmath>
#include <functional>

#include "toposeg/image.hpp"

namespace toposeg
{

using ScoreGrid = Grid<double>;
using ImageMap = std::function<GrayImage(const GrayImage&)>;
using ScoreMap = std::function<ScoreGrid(const GrayImage&)>;

struct GanWeights
{
    double lambda_c = 10.0;
    double lambda_i = 0.5;
};

struct GeneratorObjective
{
    double adv = 0.0;
    double cycle = 0.0;
    double identity = 0.0;
    double total = 0.0;
};

/// Which generator the identity term routes the real image through.
enum class IdentityRoute
{
    Opposite,  // |I_A - G_B(I_A)|
    SameSide,  // |I_A - G_A(I_A)|
};

namespace detail
{

inline double mean_squared_offset(const ScoreGrid& s, double target)
{
    if (s.empty())
        throw InvalidArgument("discriminator returned an empty score grid");
    double sum = 0.0;
    for (double v : s.values())
        sum += (v - target) * (v - target);
    return sum / static_cast<double>(s.size());
}

inline double mean_abs_error(const GrayImage& a, const GrayImage& b)
{
    require_same_shape(a, b, "generator output");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

}  // namespace detail

/// Generator update objective for the A side. The B side is the same call
/// with (I_B, G_B, G_A, D_B).
inline GeneratorObjective generator_objective(const GrayImage& real_a, const ImageMap& gen_a, const ImageMap& gen_b,
                                              const ScoreMap& disc_a, const GanWeights& w = {},
                                              IdentityRoute route = IdentityRoute::Opposite)
{
    if (!(w.lambda_c >= 0.0) || !(w.lambda_i >= 0.0))
        throw InvalidArgument("GAN weights must be >= 0");
    const GrayImage fake = gen_a(real_a);
    require_same_shape(real_a, fake, "generator output");
    GeneratorObjective out;
    out.adv = detail::mean_squared_offset(disc_a(fake), 1.0);
    out.cycle = detail::mean_abs_error(real_a, gen_b(fake));
    out.identity = detail::mean_abs_error(real_a, route == IdentityRoute::Opposite ? gen_b(real_a) : gen_a(real_a));
    out.total = out.adv + w.lambda_c * out.cycle + w.lambda_i * out.identity;
    return out;
}

/// 0.5 * mean|D(real) - 1|^2 + 0.5 * mean|D(fake)|^2
inline double discriminator_objective(const GrayImage& real, const GrayImage& fake, const ScoreMap& disc)
{
    return 0.5 * detail::mean_squared_offset(disc(real), 1.0) + 0.5 * detail::mean_squared_offset(disc(fake), 0.0);
}

}  // namespace toposeg
