#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace
{

struct Overrides
{
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> threads;
    std::optional<double> q;
    std::optional<double> diagonal_weight;
    std::optional<bool> normalize_spatial;
    std::optional<double> weight_floor;
    std::optional<double> lambda_c;
    std::optional<double> lambda_i;
    std::optional<double> lambda_tc;
    std::optional<double> lambda_ts;
    std::optional<double> bin_threshold;
    std::optional<std::size_t> betti_tile;
    std::optional<std::string> extractor_weights;

    // flags > config file > built-in defaults
    toposeg::RunConfig resolve() const
    {
        toposeg::RunConfig c;
        if (!config_path.empty())
            c = toposeg::load_config(config_path, c);
        auto set = [](auto& dst, const auto& src) {
            if (src)
                dst = *src;
        };
        set(c.out_dir, out_dir);
        set(c.threads, threads);
        set(c.q, q);
        set(c.diagonal_weight, diagonal_weight);
        set(c.normalize_spatial, normalize_spatial);
        set(c.weight_floor, weight_floor);
        set(c.lambda_c, lambda_c);
        set(c.lambda_i, lambda_i);
        set(c.lambda_tc, lambda_tc);
        set(c.lambda_ts, lambda_ts);
        set(c.bin_threshold, bin_threshold);
        set(c.betti_tile, betti_tile);
        set(c.extractor_weights, extractor_weights);
        c.validate();
        return c;
    }
};

}  // namespace

int main(int argc, char** argv)
{
    using namespace toposeg::cli;

    CLI::App app{"Topology-aware segmentation losses, persistence diagrams and metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides ov;
    app.add_option("--config", ov.config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out-dir", ov.out_dir, "Output directory");
    app.add_option("--threads", ov.threads, "Worker threads for eval")->check(CLI::PositiveNumber);
    app.add_option("--q", ov.q, "Wasserstein exponent");
    app.add_option("--diagonal-weight", ov.diagonal_weight, "Spatial weight of diagonal matches");
    app.add_option("--normalize-spatial", ov.normalize_spatial, "Divide cell distances by the image diagonal");
    app.add_option("--weight-floor", ov.weight_floor, "Lower bound on point-to-point spatial weights");
    app.add_option("--lambda-c", ov.lambda_c, "Cycle-consistency weight");
    app.add_option("--lambda-i", ov.lambda_i, "Identity weight");
    app.add_option("--lambda-tc", ov.lambda_tc, "Perceptual topological loss weight");
    app.add_option("--lambda-ts", ov.lambda_ts, "Persistent topological loss weight");
    app.add_option("--bin-threshold", ov.bin_threshold, "Binarisation threshold for metrics");
    app.add_option("--betti-tile", ov.betti_tile, "Tile side for patch-mode Betti errors (0 = whole image)");
    app.add_option("--extractor-weights", ov.extractor_weights, "Feature extractor weights JSON");

    std::string image, pred, gt, out, init;
    std::size_t iters = 100;
    double step = 0.1;

    auto* diagram = app.add_subcommand("diagram", "Persistence diagram and Betti curve of an image");
    diagram->add_option("image", image, "Input image")->required();
    diagram->add_option("-o,--out", out, "Diagram JSON path (Betti CSV is written alongside)");

    auto* match = app.add_subcommand("match", "Optimal diagram matching between two images");
    match->add_option("pred", pred, "Predicted image")->required();
    match->add_option("gt", gt, "Target image")->required();
    match->add_option("-o,--out", out, "Matching JSON path (default: stdout)");

    auto* loss = app.add_subcommand("loss", "Combined loss and gradient");
    loss->add_option("pred", pred, "Predicted probability map")->required();
    loss->add_option("gt", gt, "Binary ground truth")->required();

    auto* eval = app.add_subcommand("eval", "Metric report over two directories paired by file stem");
    eval->add_option("pred_dir", pred, "Prediction directory")->required();
    eval->add_option("gt_dir", gt, "Ground-truth directory")->required();

    auto* optimize = app.add_subcommand("optimize", "Gradient descent on pixels against the combined loss");
    optimize->add_option("init", init, "Initial prediction")->required();
    optimize->add_option("gt", gt, "Binary ground truth")->required();
    optimize->add_option("--iters", iters, "Iterations");
    optimize->add_option("--step", step, "Step size");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    toposeg::RunConfig config;
    try
    {
        config = ov.resolve();
    }
    catch (const toposeg::IoError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kIoFailure;
    }
    catch (const toposeg::Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    Context ctx{config, std::cout, std::cerr};
    if (*diagram)
        return cmd_diagram(ctx, image, out);
    if (*match)
        return cmd_match(ctx, pred, gt, out);
    if (*loss)
        return cmd_loss(ctx, pred, gt);
    if (*eval)
        return cmd_eval(ctx, pred, gt);
    if (*optimize)
        return cmd_optimize(ctx, init, gt, iters, step);
    return kUsage;
}
