#pragma once

// Fixed convolutional feature pyramid used by the perceptual loss, with an
// exact backward pass. Convolutions are cross-correlations with replicate
// padding ("same" output size).

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toposeg/error.hpp"
#include "toposeg/image.hpp"

namespace toposeg
{

/// Channels x height x width, row-major per channel.
struct FeatureMap
{
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : channels(c), height(h), width(w), data(c * h * w, fill)
    {
    }

    double& at(std::size_t c, std::size_t r, std::size_t col) { return data[(c * height + r) * width + col]; }
    double at(std::size_t c, std::size_t r, std::size_t col) const { return data[(c * height + r) * width + col]; }
};

struct ConvStage
{
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel = 1;       // odd square kernel side
    std::vector<double> weights;  // [out][in][kernel][kernel]
    bool rectify = true;
    bool downsample = true;
    bool tap = true;

    double weight(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const
    {
        return weights[((o * in_channels + i) * kernel + ky) * kernel + kx];
    }

    void validate() const
    {
        if (in_channels == 0 || out_channels == 0)
            throw InvalidArgument("stage needs at least one input and one output channel");
        if (kernel % 2 == 0)
            throw InvalidArgument("stage kernel side must be odd");
        if (weights.size() != out_channels * in_channels * kernel * kernel)
            throw InvalidArgument("stage weight count does not match its shape");
    }
};

/// Per-stage intermediate values kept for the backward pass.
struct StageTrace
{
    FeatureMap input;
    FeatureMap pre_activation;
    FeatureMap output;
};

class FeatureExtractor
{
public:
    FeatureExtractor() = default;
    explicit FeatureExtractor(std::vector<ConvStage> stages) : stages_(std::move(stages))
    {
        if (stages_.empty())
            throw InvalidArgument("feature extractor needs at least one stage");
        if (stages_.front().in_channels != 1)
            throw InvalidArgument("first stage must take a single input channel");
        for (std::size_t s = 0; s < stages_.size(); ++s)
        {
            stages_[s].validate();
            if (s > 0 && stages_[s].in_channels != stages_[s - 1].out_channels)
                throw InvalidArgument("stage " + std::to_string(s) + " input channels do not match previous stage");
        }
    }

    const std::vector<ConvStage>& stages() const noexcept { return stages_; }

    std::vector<StageTrace> forward(const GrayImage& img) const
    {
        FeatureMap x(1, img.height(), img.width());
        std::copy(img.values().begin(), img.values().end(), x.data.begin());
        std::vector<StageTrace> trace;
        trace.reserve(stages_.size());
        for (const ConvStage& st : stages_)
        {
            StageTrace t;
            t.input = x;
            t.pre_activation = convolve(st, x);
            FeatureMap act = t.pre_activation;
            if (st.rectify)
                for (double& v : act.data)
                    v = v > 0.0 ? v : 0.0;
            t.output = st.downsample ? pool(act) : std::move(act);
            x = t.output;
            trace.push_back(std::move(t));
        }
        return trace;
    }

    /// Outputs of the tapped stages only.
    std::vector<FeatureMap> features(const GrayImage& img) const
    {
        std::vector<FeatureMap> out;
        auto trace = forward(img);
        for (std::size_t s = 0; s < stages_.size(); ++s)
            if (stages_[s].tap)
                out.push_back(std::move(trace[s].output));
        return out;
    }

    /// Gradient with respect to the input image, given d(loss)/d(output) for
    /// every stage (zero maps allowed).
    Grid<double> backward(const std::vector<StageTrace>& trace, std::vector<FeatureMap> output_grads) const
    {
        FeatureMap carry;  // gradient flowing into stage s's output from stage s+1
        for (std::size_t s = stages_.size(); s-- > 0;)
        {
            const ConvStage& st = stages_[s];
            FeatureMap g = std::move(output_grads[s]);
            if (!carry.data.empty())
                for (std::size_t i = 0; i < g.data.size(); ++i)
                    g.data[i] += carry.data[i];
            const StageTrace& t = trace[s];
            FeatureMap act_grad = st.downsample ? unpool(g, t.pre_activation.height, t.pre_activation.width) : g;
            if (st.rectify)
                for (std::size_t i = 0; i < act_grad.data.size(); ++i)
                    if (!(t.pre_activation.data[i] > 0.0))
                        act_grad.data[i] = 0.0;
            carry = convolve_adjoint(st, act_grad, t.input.height, t.input.width);
        }
        return Grid<double>(carry.height, carry.width, std::move(carry.data));
    }

    static FeatureMap convolve(const ConvStage& st, const FeatureMap& in)
    {
        const std::size_t h = in.height;
        const std::size_t w = in.width;
        const auto r = static_cast<std::ptrdiff_t>(st.kernel / 2);
        FeatureMap out(st.out_channels, h, w);
        for (std::size_t o = 0; o < st.out_channels; ++o)
            for (std::size_t i = 0; i < st.in_channels; ++i)
                for (std::size_t ky = 0; ky < st.kernel; ++ky)
                    for (std::size_t kx = 0; kx < st.kernel; ++kx)
                    {
                        const double wt = st.weight(o, i, ky, kx);
                        if (wt == 0.0)
                            continue;
                        for (std::size_t y = 0; y < h; ++y)
                        {
                            const std::size_t sy = clamp_index(static_cast<std::ptrdiff_t>(y + ky) - r, h);
                            for (std::size_t x = 0; x < w; ++x)
                            {
                                const std::size_t sx = clamp_index(static_cast<std::ptrdiff_t>(x + kx) - r, w);
                                out.at(o, y, x) += wt * in.at(i, sy, sx);
                            }
                        }
                    }
        return out;
    }

    static FeatureMap convolve_adjoint(const ConvStage& st, const FeatureMap& grad_out, std::size_t h, std::size_t w)
    {
        const auto r = static_cast<std::ptrdiff_t>(st.kernel / 2);
        FeatureMap grad_in(st.in_channels, h, w);
        for (std::size_t o = 0; o < st.out_channels; ++o)
            for (std::size_t i = 0; i < st.in_channels; ++i)
                for (std::size_t ky = 0; ky < st.kernel; ++ky)
                    for (std::size_t kx = 0; kx < st.kernel; ++kx)
                    {
                        const double wt = st.weight(o, i, ky, kx);
                        if (wt == 0.0)
                            continue;
                        for (std::size_t y = 0; y < h; ++y)
                        {
                            const std::size_t sy = clamp_index(static_cast<std::ptrdiff_t>(y + ky) - r, h);
                            for (std::size_t x = 0; x < w; ++x)
                            {
                                const std::size_t sx = clamp_index(static_cast<std::ptrdiff_t>(x + kx) - r, w);
                                grad_in.at(i, sy, sx) += wt * grad_out.at(o, y, x);
                            }
                        }
                    }
        return grad_in;
    }

    /// 2x2 average pooling; output side is ceil(side / 2) and edge windows
    /// average over the cells they cover.
    static FeatureMap pool(const FeatureMap& in)
    {
        const std::size_t oh = (in.height + 1) / 2;
        const std::size_t ow = (in.width + 1) / 2;
        FeatureMap out(in.channels, oh, ow);
        for (std::size_t c = 0; c < in.channels; ++c)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x)
                {
                    const std::size_t y1 = std::min(2 * y + 2, in.height);
                    const std::size_t x1 = std::min(2 * x + 2, in.width);
                    double sum = 0.0;
                    for (std::size_t yy = 2 * y; yy < y1; ++yy)
                        for (std::size_t xx = 2 * x; xx < x1; ++xx)
                            sum += in.at(c, yy, xx);
                    out.at(c, y, x) = sum / static_cast<double>((y1 - 2 * y) * (x1 - 2 * x));
                }
        return out;
    }

    static FeatureMap unpool(const FeatureMap& grad, std::size_t h, std::size_t w)
    {
        FeatureMap out(grad.channels, h, w);
        for (std::size_t c = 0; c < grad.channels; ++c)
            for (std::size_t y = 0; y < grad.height; ++y)
                for (std::size_t x = 0; x < grad.width; ++x)
                {
                    const std::size_t y1 = std::min(2 * y + 2, h);
                    const std::size_t x1 = std::min(2 * x + 2, w);
                    const double share = grad.at(c, y, x) / static_cast<double>((y1 - 2 * y) * (x1 - 2 * x));
                    for (std::size_t yy = 2 * y; yy < y1; ++yy)
                        for (std::size_t xx = 2 * x; xx < x1; ++xx)
                            out.at(c, yy, xx) += share;
                }
        return out;
    }

    bool operator==(const FeatureExtractor& other) const
    {
        if (stages_.size() != other.stages_.size())
            return false;
        for (std::size_t s = 0; s < stages_.size(); ++s)
        {
            const ConvStage& a = stages_[s];
            const ConvStage& b = other.stages_[s];
            if (a.in_channels != b.in_channels || a.out_channels != b.out_channels || a.kernel != b.kernel ||
                a.weights != b.weights || a.rectify != b.rectify || a.downsample != b.downsample || a.tap != b.tap)
                return false;
        }
        return true;
    }

private:
    static std::size_t clamp_index(std::ptrdiff_t i, std::size_t n)
    {
        if (i < 0)
            return 0;
        if (static_cast<std::size_t>(i) >= n)
            return n - 1;
        return static_cast<std::size_t>(i);
    }

    std::vector<ConvStage> stages_;
};

using Kernel3 = std::array<double, 9>;

/// The eight 3x3 kernels of the default bank, in channel order: Gaussian,
/// first derivatives at 0/45/90/135 degrees, Laplacian, and second
/// derivatives along both diagonals.
inline std::array<Kernel3, 8> default_kernels()
{
    return {{
        {1 / 16., 2 / 16., 1 / 16., 2 / 16., 4 / 16., 2 / 16., 1 / 16., 2 / 16., 1 / 16.},
        {-1 / 8., 0, 1 / 8., -2 / 8., 0, 2 / 8., -1 / 8., 0, 1 / 8.},
        {0, 1 / 8., 2 / 8., -1 / 8., 0, 1 / 8., -2 / 8., -1 / 8., 0},
        {-1 / 8., -2 / 8., -1 / 8., 0, 0, 0, 1 / 8., 2 / 8., 1 / 8.},
        {-2 / 8., -1 / 8., 0, -1 / 8., 0, 1 / 8., 0, 1 / 8., 2 / 8.},
        {0, 1, 0, 1, -4, 1, 0, 1, 0},
        {1, 0, 0, 0, -2, 0, 0, 0, 1},
        {0, 0, 1, 0, -2, 0, 1, 0, 0},
    }};
}

/// Builds a stage whose output channel o applies kernel o to the mean of the
/// input channels.
inline ConvStage make_bank_stage(const std::vector<std::vector<double>>& kernels, std::size_t in_channels,
                                 std::size_t side, bool rectify, bool downsample, bool tap)
{
    ConvStage st;
    st.in_channels = in_channels;
    st.out_channels = kernels.size();
    st.kernel = side;
    st.rectify = rectify;
    st.downsample = downsample;
    st.tap = tap;
    st.weights.reserve(st.out_channels * in_channels * side * side);
    for (const auto& k : kernels)
    {
        if (k.size() != side * side)
            throw InvalidArgument("kernel is not " + std::to_string(side) + "x" + std::to_string(side));
        for (std::size_t i = 0; i < in_channels; ++i)
            for (double v : k)
                st.weights.push_back(v / static_cast<double>(in_channels));
    }
    return st;
}

inline FeatureExtractor default_extractor()
{
    std::vector<std::vector<double>> bank;
    for (const Kernel3& k : default_kernels())
        bank.emplace_back(k.begin(), k.end());
    std::vector<ConvStage> stages;
    stages.push_back(make_bank_stage(bank, 1, 3, true, true, true));
    stages.push_back(make_bank_stage(bank, 8, 3, true, true, true));
    stages.push_back(make_bank_stage(bank, 8, 3, true, true, true));
    return FeatureExtractor(std::move(stages));
}

/// Parses an extractor description:
///   [ {"filters": [[...],...], "downsample": true, "rectify": true, "tap": true}, ... ]
/// Each filter is either a 2D kernel (applied to the mean of the input
/// channels) or a 3D [in][k][k] array for a full convolution.
inline FeatureExtractor extractor_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.empty())
        throw InvalidArgument("extractor weights: expected a non-empty array of stages");
    std::vector<ConvStage> stages;
    std::size_t in_channels = 1;
    for (const auto& js : j)
    {
        const auto& filters = js.at("filters");
        if (!filters.is_array() || filters.empty())
            throw InvalidArgument("extractor weights: stage without filters");
        const bool rectify = js.value("rectify", true);
        const bool downsample = js.value("downsample", false);
        const bool tap = js.value("tap", true);
        const bool full = filters[0].is_array() && !filters[0].empty() && filters[0][0].is_array() &&
                          !filters[0][0].empty() && filters[0][0][0].is_array();
        ConvStage st;
        if (!full)
        {
            std::vector<std::vector<double>> bank;
            std::size_t side = 0;
            for (const auto& f : filters)
            {
                side = f.size();
                std::vector<double> k;
                for (const auto& row : f)
                {
                    if (row.size() != side)
                        throw InvalidArgument("extractor weights: kernels must be square");
                    for (const auto& v : row)
                        k.push_back(v.get<double>());
                }
                bank.push_back(std::move(k));
            }
            st = make_bank_stage(bank, in_channels, side, rectify, downsample, tap);
        }
        else
        {
            st.in_channels = filters[0].size();
            st.out_channels = filters.size();
            st.kernel = filters[0][0].size();
            st.rectify = rectify;
            st.downsample = downsample;
            st.tap = tap;
            for (const auto& f : filters)
                for (const auto& plane : f)
                    for (const auto& row : plane)
                        for (const auto& v : row)
                            st.weights.push_back(v.get<double>());
        }
        in_channels = st.out_channels;
        stages.push_back(std::move(st));
    }
    return FeatureExtractor(std::move(stages));
}

inline FeatureExtractor load_extractor(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("unreadable file: " + path.string());
    nlohmann::json j;
    try
    {
        in >> j;
        return extractor_from_json(j);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidArgument("extractor weights " + path.string() + ": " + e.what());
    }
}

}  // namespace toposeg
