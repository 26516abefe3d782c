#pragma once

// Run configuration shared by the CLI and foreign-language front ends.
// Every knob has exactly one canonical key; unknown keys are rejected.

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "toposeg/gan_losses.hpp"
#include "toposeg/losses.hpp"
#include "toposeg/metrics.hpp"

namespace toposeg
{

struct RunConfig
{
    double q = 2.0;
    double diagonal_weight = 1.0;
    bool normalize_spatial = true;
    double weight_floor = 0.0;
    double lambda_c = 10.0;
    double lambda_i = 0.5;
    double lambda_tc = 0.05;
    double lambda_ts = 0.0002;
    double bin_threshold = 0.5;
    std::size_t betti_tile = 0;
    std::size_t threads = 1;
    std::string extractor_weights;  // empty = built-in pyramid
    std::string out_dir = ".";

    void validate() const
    {
        loss().validate();
        if (!(lambda_c >= 0.0) || !(lambda_i >= 0.0))
            throw InvalidArgument("lambda_c and lambda_i must be >= 0");
        if (!(bin_threshold >= 0.0 && bin_threshold <= 1.0))
            throw InvalidArgument("bin_threshold outside [0,1]");
        if (threads == 0)
            throw InvalidArgument("threads must be >= 1");
    }

    MatchConfig match() const
    {
        MatchConfig m;
        m.q = q;
        m.diagonal_weight = diagonal_weight;
        m.normalize_spatial = normalize_spatial;
        m.weight_floor = weight_floor;
        return m;
    }

    LossConfig loss() const { return {lambda_tc, lambda_ts, match()}; }
    GanWeights gan() const { return {lambda_c, lambda_i}; }
    EvalOptions eval() const { return {bin_threshold, betti_tile, threads}; }

    FeatureExtractor extractor() const
    {
        return extractor_weights.empty() ? default_extractor() : load_extractor(extractor_weights);
    }
};

inline nlohmann::json to_json(const RunConfig& c)
{
    return {{"q", c.q},
            {"diagonal_weight", c.diagonal_weight},
            {"normalize_spatial", c.normalize_spatial},
            {"weight_floor", c.weight_floor},
            {"lambda_c", c.lambda_c},
            {"lambda_i", c.lambda_i},
            {"lambda_tc", c.lambda_tc},
            {"lambda_ts", c.lambda_ts},
            {"bin_threshold", c.bin_threshold},
            {"betti_tile", c.betti_tile},
            {"threads", c.threads},
            {"extractor_weights", c.extractor_weights},
            {"out_dir", c.out_dir}};
}

/// Overlays the keys present in `j` onto `base`.
inline RunConfig apply_json(RunConfig base, const nlohmann::json& j)
{
    if (!j.is_object())
        throw InvalidArgument("config must be a JSON object");
    const nlohmann::json known = to_json(base);
    for (const auto& [key, value] : j.items())
    {
        if (!known.contains(key))
            throw InvalidArgument("unknown config key '" + key + "'");
        try
        {
            if (key == "q") base.q = value.get<double>();
            else if (key == "diagonal_weight") base.diagonal_weight = value.get<double>();
            else if (key == "normalize_spatial") base.normalize_spatial = value.get<bool>();
            else if (key == "weight_floor") base.weight_floor = value.get<double>();
            else if (key == "lambda_c") base.lambda_c = value.get<double>();
            else if (key == "lambda_i") base.lambda_i = value.get<double>();
            else if (key == "lambda_tc") base.lambda_tc = value.get<double>();
            else if (key == "lambda_ts") base.lambda_ts = value.get<double>();
            else if (key == "bin_threshold") base.bin_threshold = value.get<double>();
            else if (key == "betti_tile") base.betti_tile = value.get<std::size_t>();
            else if (key == "threads") base.threads = value.get<std::size_t>();
            else if (key == "extractor_weights") base.extractor_weights = value.get<std::string>();
            else if (key == "out_dir") base.out_dir = value.get<std::string>();
        }
        catch (const nlohmann::json::exception&)
        {
            throw InvalidArgument("config key '" + key + "' has the wrong type");
        }
    }
    return base;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {})
{
    std::ifstream in(path);
    if (!in)
        throw IoError("unreadable file: " + path.string());
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    return apply_json(std::move(base), j);
}

}  // namespace toposeg
