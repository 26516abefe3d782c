#pragma once

// JSON/CSV encodings of diagrams, matchings, metric reports and gradient
// blobs.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <string>

#include <json.hpp>

#include "toposeg/image_io.hpp"
#include "toposeg/losses.hpp"
#include "toposeg/metrics.hpp"

namespace toposeg
{

/// Shortest decimal form that round-trips.
inline std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json cell_json(const Cell& c)
{
    return nlohmann::json::array({c.row, c.col});
}

inline nlohmann::json to_json(const PersistencePair& p)
{
    return {
        {"dim", p.dim},
        {"creation", p.creation},
        {"destruction", p.destruction},
        {"creation_cell", cell_json(p.creation_cell)},
        {"destruction_cell", p.destruction_cell ? cell_json(*p.destruction_cell) : nlohmann::json(nullptr)},
        {"essential", p.essential},
    };
}

/// Array of pairs in canonical order.
inline nlohmann::json to_json(const PersistenceDiagram& d)
{
    std::vector<PersistencePair> pairs = d.pairs;
    std::sort(pairs.begin(), pairs.end(), canonical_less);
    nlohmann::json out = nlohmann::json::array();
    for (const PersistencePair& p : pairs)
        out.push_back(to_json(p));
    return out;
}

inline PersistenceDiagram diagram_from_json(const nlohmann::json& j, std::size_t height, std::size_t width)
{
    PersistenceDiagram d;
    d.height = height;
    d.width = width;
    for (const auto& jp : j)
    {
        PersistencePair p;
        p.dim = jp.at("dim").get<int>();
        p.creation = jp.at("creation").get<double>();
        p.destruction = jp.at("destruction").get<double>();
        p.creation_cell = {jp.at("creation_cell").at(0).get<std::size_t>(), jp.at("creation_cell").at(1).get<std::size_t>()};
        if (!jp.at("destruction_cell").is_null())
            p.destruction_cell = Cell{jp["destruction_cell"].at(0).get<std::size_t>(),
                                      jp["destruction_cell"].at(1).get<std::size_t>()};
        p.essential = jp.at("essential").get<bool>();
        d.pairs.push_back(p);
    }
    return d;
}

inline std::string betti_curve_csv(const BettiCurve& curve)
{
    std::string out = "threshold,beta0,beta1\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        out += format_double(curve.thresholds[i]) + "," + std::to_string(curve.counts[i].b0) + "," +
               std::to_string(curve.counts[i].b1) + "\n";
    return out;
}

inline nlohmann::json to_json(const Matching& m)
{
    nlohmann::json pairs = nlohmann::json::array();
    for (const Assignment& a : m.assignments)
        pairs.push_back({{"pred", a.pred},
                         {"gt", a.gt ? nlohmann::json(*a.gt) : nlohmann::json("diagonal")},
                         {"weight", a.weight},
                         {"cost", a.cost}});
    return {{"dim", m.dim}, {"pairs", pairs}, {"unmatched_gt", m.unmatched_gt}, {"total_cost", m.total_cost}};
}

inline nlohmann::json to_json(const DiagramMatching& m)
{
    return {{"dims", nlohmann::json::array({to_json(m.dims[0]), to_json(m.dims[1])})}, {"total_cost", m.total_cost}};
}

inline constexpr const char* kReportHeader = "image,acc,dice,sp,se,pr,f1,mcc,cldice,betti0_err,betti1_err";

inline std::string csv_row(const MetricsRow& r)
{
    std::string out = r.image;
    for (double v : {r.acc, r.dice, r.sp, r.se, r.pr, r.f1, r.mcc, r.cldice, r.betti0_err, r.betti1_err})
        out += "," + format_double(v);
    return out;
}

inline std::string report_csv(const MetricsReport& report)
{
    std::string out = std::string(kReportHeader) + "\n";
    for (const MetricsRow& r : report.rows)
        out += csv_row(r) + "\n";
    out += csv_row(report.mean) + "\n";
    return out;
}

inline nlohmann::json to_json(const MetricsRow& r)
{
    return {{"image", r.image},   {"acc", r.acc}, {"dice", r.dice},     {"sp", r.sp},
            {"se", r.se},         {"pr", r.pr},   {"f1", r.f1},         {"mcc", r.mcc},
            {"cldice", r.cldice}, {"betti0_err", r.betti0_err}, {"betti1_err", r.betti1_err}};
}

inline nlohmann::json to_json(const MetricsReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const MetricsRow& r : report.rows)
        rows.push_back(to_json(r));
    return {{"rows", rows}, {"mean", to_json(report.mean)}};
}

/// Raw float32 little-endian row-major.
inline std::string encode_f32_blob(const Grid<double>& g)
{
    std::string out(g.size() * 4, '\0');
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(g[i]));
        for (int b = 0; b < 4; ++b)
            out[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    return out;
}

inline Grid<double> decode_f32_blob(const std::string& bytes, std::size_t height, std::size_t width)
{
    if (bytes.size() != height * width * 4)
        throw FormatError("gradient blob size does not match header");
    Grid<double> g(height, width);
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= std::uint32_t(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        g[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    return g;
}

}  // namespace toposeg
