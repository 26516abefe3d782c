#pragma once

// Subcommand implementations for the toposeg CLI. Each returns a process
// exit code: 0 success, 1 I/O, 2 usage, 3 pairing/validation.

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toposeg/toposeg.hpp"

namespace toposeg::cli
{

namespace fs = std::filesystem;

enum ExitCode : int
{
    kOk = 0,
    kIoFailure = 1,
    kUsage = 2,
    kValidation = 3,
};

struct Context
{
    RunConfig config;
    std::ostream& out;
    std::ostream& err;
};

template <typename F>
int guarded(Context& ctx, F&& body)
{
    try
    {
        return body();
    }
    catch (const IoError& e)
    {
        ctx.err << "error: " << e.what() << "\n";
        return kIoFailure;
    }
    catch (const FormatError& e)
    {
        ctx.err << "error: " << e.what() << "\n";
        return kIoFailure;
    }
    catch (const Error& e)
    {
        ctx.err << "error: " << e.what() << "\n";
        return kValidation;
    }
    catch (const fs::filesystem_error& e)
    {
        ctx.err << "error: " << e.what() << "\n";
        return kIoFailure;
    }
}

inline fs::path ensure_out_dir(const Context& ctx)
{
    fs::path dir = ctx.config.out_dir.empty() ? fs::path(".") : fs::path(ctx.config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

/// Ground truths are read as images and must already be {0,1}-valued.
inline GrayImage load_ground_truth(const fs::path& path)
{
    GrayImage gt = load_grayscale(path);
    if (!is_binary(gt))
        throw InvalidArgument("ground truth " + path.string() + " is not binary");
    return gt;
}

/// Writes `<out>` (diagram JSON) and the Betti curve next to it
/// (`<out stem>.betti.csv`). Without `out`, writes into the output directory.
inline int cmd_diagram(Context& ctx, const fs::path& image, fs::path out)
{
    return guarded(ctx, [&] {
        const GrayImage img = load_grayscale(image);
        if (out.empty())
            out = ensure_out_dir(ctx) / (image.stem().string() + ".diagram.json");
        const PersistenceDiagram d = compute_diagram(img);
        write_file_atomic(out, to_json(d).dump(2) + "\n");
        fs::path csv = out;
        csv.replace_extension(".betti.csv");
        write_file_atomic(csv, betti_curve_csv(betti_curve(img)));
        ctx.out << out.string() << "\n" << csv.string() << "\n";
        return kOk;
    });
}

inline int cmd_match(Context& ctx, const fs::path& pred_path, const fs::path& gt_path, fs::path out)
{
    return guarded(ctx, [&] {
        const GrayImage pred = load_grayscale(pred_path);
        const GrayImage gt = load_grayscale(gt_path);
        require_same_shape(pred, gt, "match");
        const DiagramMatching m = match_diagrams(compute_diagram(pred), compute_diagram(gt), ctx.config.match());
        const std::string text = to_json(m).dump(2) + "\n";
        if (out.empty())
            ctx.out << text;
        else
            write_file_atomic(out, text);
        return kOk;
    });
}

/// Prints {total, bce, tc, ts}; writes loss.json, gradient.f32 and its
/// gradient.json header into the output directory.
inline int cmd_loss(Context& ctx, const fs::path& pred_path, const fs::path& gt_path)
{
    return guarded(ctx, [&] {
        const GrayImage pred = load_grayscale(pred_path);
        const GrayImage gt = load_ground_truth(gt_path);
        const TotalLoss loss = total_loss(pred, gt, ctx.config.loss(), ctx.config.extractor());
        const fs::path dir = ensure_out_dir(ctx);
        write_file_atomic(dir / "gradient.f32", encode_f32_blob(loss.total.gradient));
        write_file_atomic(dir / "gradient.json",
                          nlohmann::json{{"height", pred.height()}, {"width", pred.width()}}.dump() + "\n");
        const nlohmann::json dump = {{"value", loss.total.value},
                                     {"components", {{"bce", loss.bce}, {"tc", loss.tc}, {"ts", loss.ts}}},
                                     {"gradient_file", "gradient.f32"}};
        write_file_atomic(dir / "loss.json", dump.dump(2) + "\n");
        ctx.out << nlohmann::json{{"total", loss.total.value}, {"bce", loss.bce}, {"tc", loss.tc}, {"ts", loss.ts}}.dump()
                << "\n";
        return kOk;
    });
}

inline bool is_image_file(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".ppm" || ext == ".png" || ext == ".pnm";
}

inline std::map<std::string, fs::path> images_by_stem(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw IoError("not a directory: " + dir.string());
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && is_image_file(entry.path()))
            if (!out.emplace(entry.path().stem().string(), entry.path()).second)
                throw InvalidArgument("duplicate image stem '" + entry.path().stem().string() + "' in " + dir.string());
    return out;
}

/// Pairs predictions with ground truths by file stem (sorted), writes
/// metrics.csv and metrics.json.
inline int cmd_eval(Context& ctx, const fs::path& pred_dir, const fs::path& gt_dir)
{
    return guarded(ctx, [&] {
        const auto preds = images_by_stem(pred_dir);
        const auto gts = images_by_stem(gt_dir);
        std::vector<std::string> unpaired;
        for (const auto& [stem, _] : preds)
            if (!gts.contains(stem))
                unpaired.push_back(stem);
        for (const auto& [stem, _] : gts)
            if (!preds.contains(stem))
                unpaired.push_back(stem);
        if (!unpaired.empty())
        {
            std::sort(unpaired.begin(), unpaired.end());
            ctx.err << "error: unpaired image stems:";
            for (const auto& s : unpaired)
                ctx.err << " " << s;
            ctx.err << "\n";
            return kValidation;
        }

        std::vector<EvalSample> samples;
        for (const auto& [stem, path] : preds)
            samples.push_back({stem, load_grayscale(path), threshold_mask(load_grayscale(gts.at(stem)), 0.5)});
        const MetricsReport report = evaluate_dataset(samples, ctx.config.eval());
        const fs::path dir = ensure_out_dir(ctx);
        const std::string csv = report_csv(report);
        write_file_atomic(dir / "metrics.csv", csv);
        write_file_atomic(dir / "metrics.json", to_json(report).dump(2) + "\n");
        ctx.out << csv;
        return kOk;
    });
}

inline std::string optimize_history_csv(const std::vector<OptimizeStep>& history)
{
    std::string out = "iter,total,bce,tc,ts,betti0_err,betti1_err\n";
    for (const OptimizeStep& s : history)
        out += std::to_string(s.iter) + "," + format_double(s.total) + "," + format_double(s.bce) + "," +
               format_double(s.tc) + "," + format_double(s.ts) + "," + std::to_string(s.betti0_err) + "," +
               std::to_string(s.betti1_err) + "\n";
    return out;
}

/// Gradient descent on pixels; writes optimized.pgm, optimized.f32 (exact
/// values) and optimize.csv.
inline int cmd_optimize(Context& ctx, const fs::path& init_path, const fs::path& gt_path, std::size_t iters,
                        double step)
{
    if (iters == 0 || !(step >= 0.0))
    {
        ctx.err << "error: iters must be >= 1 and step >= 0\n";
        return kUsage;
    }
    return guarded(ctx, [&] {
        const GrayImage init = load_grayscale(init_path);
        const GrayImage gt = load_ground_truth(gt_path);
        const OptimizeResult res = optimize_pixels(init, gt, ctx.config.loss(), ctx.config.extractor(), iters, step,
                                                   ctx.config.bin_threshold);
        const fs::path dir = ensure_out_dir(ctx);
        save_pgm(res.image, dir / "optimized.pgm");
        write_file_atomic(dir / "optimized.f32", encode_f32_blob(res.image.grid()));
        write_file_atomic(dir / "optimize.csv", optimize_history_csv(res.history));
        const OptimizeStep& last = res.history.back();
        ctx.out << nlohmann::json{{"iters", iters},
                                  {"total", last.total},
                                  {"betti0_err", last.betti0_err},
                                  {"betti1_err", last.betti1_err}}
                       .dump()
                << "\n";
        return kOk;
    });
}

}  // namespace toposeg::cli
