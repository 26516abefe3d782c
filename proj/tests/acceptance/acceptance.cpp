// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace toposeg;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
        o = body();
    }
    catch (const std::exception& e)
    {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs >= budget_s)
    {
        o.pass = false;
        o.detail += " [over time budget " + std::to_string(budget_s) + " s]";
    }
    if (!o.pass)
        ++failures;
    std::printf("%s  %-36s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// Persistence/oracle equivalence: alive counts reproduce the Betti curve.
Outcome persistence_equivalence()
{
    std::mt19937_64 rng(20240601);
    std::size_t thresholds = 0;
    for (int trial = 0; trial < 200; ++trial)
    {
        const GrayImage img = oracle::random_levels_image(rng, 8, 8, {0.0, 0.25, 0.5, 0.75, 1.0});
        const PersistenceDiagram d = compute_diagram(img);
        const BettiCurve curve = betti_curve(img);
        for (std::size_t i = 0; i < curve.thresholds.size(); ++i, ++thresholds)
        {
            const double t = curve.thresholds[i];
            if (alive_count(d, 0, t) != curve.counts[i].b0 || alive_count(d, 1, t) != curve.counts[i].b1)
                return {false, "image " + std::to_string(trial) + " threshold " + std::to_string(t)};
        }
    }
    return {true, "200 images, " + std::to_string(thresholds) + " thresholds, exact"};
}

// Matching optimality against exhaustive enumeration.
Outcome matching_optimality()
{
    constexpr std::size_t side = 12;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> cell(0, side - 1), count(0, 6);
    auto random_diagram = [&] {
        PersistenceDiagram d;
        d.height = d.width = side;
        d.pairs.push_back({0, 0.5 + 0.5 * u(rng), 0.0, {cell(rng), cell(rng)}, std::nullopt, true});
        for (int dim = 0; dim < 2; ++dim)
        {
            const std::size_t n = count(rng);
            for (std::size_t i = 0; i < n; ++i)
            {
                double a = u(rng), b = u(rng);
                if (a < b)
                    std::swap(a, b);
                d.pairs.push_back({dim, a, b, {cell(rng), cell(rng)}, Cell{cell(rng), cell(rng)}, false});
            }
        }
        return d;
    };
    auto points = [](const PersistenceDiagram& d, int dim, bool essential) {
        std::vector<oracle::RefPoint> out;
        for (const auto& p : d.pairs)
            if (p.dim == dim && p.essential == essential)
                out.push_back({1.0 - p.creation, 1.0 - p.destruction, double(p.creation_cell.row),
                               double(p.creation_cell.col)});
        return out;
    };
    const double diag = std::hypot(double(side), double(side));
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const PersistenceDiagram pred = random_diagram(), gt = random_diagram();
        double brute = oracle::ref_point_cost(points(pred, 0, true)[0], points(gt, 0, true)[0], 2.0, diag);
        for (int dim = 0; dim < 2; ++dim)
            brute += oracle::brute_force_matching(points(pred, dim, false), points(gt, dim, false), 2.0, diag, 1.0);
        worst = std::max(worst, std::abs(match_diagrams(pred, gt).total_cost - brute));
    }
    return {worst <= 1e-9, fmt("100 pairs, max |solver - brute force| = %.3g", worst)};
}

// Gradient correctness of every loss against central finite differences.
Outcome gradient_correctness()
{
    std::mt19937_64 rng(99);
    const FeatureExtractor fx = default_extractor();
    const LossConfig cfg;
    double worst[4] = {0, 0, 0, 0};
    std::size_t skipped = 0, refined = 0;
    auto central = [](const GrayImage& x, std::size_t i, double eps, const std::function<double(const GrayImage&)>& f) {
        Grid<double> up = x.grid(), down = x.grid();
        up[i] += eps;
        down[i] -= eps;
        return (f(GrayImage::clamped(std::move(up))) - f(GrayImage::clamped(std::move(down)))) / (2.0 * eps);
    };
    auto check = [&](int k, const GrayImage& pred, double eps, const Grid<double>& analytic,
                     const std::function<double(const GrayImage&)>& f, bool kinks) {
        const Grid<double> numeric = oracle::finite_difference(pred, eps, f);
        for (std::size_t i = 0; i < analytic.size(); ++i)
        {
            double err = oracle::relative_error(analytic[i], numeric[i], 1e-6);
            // The optimal matching can switch inside [x - eps, x + eps];
            // the loss is smooth on either side, so shrink the step.
            for (double e = eps / 8.0; err >= 1e-4 && e >= eps / 64.0; e /= 8.0)
            {
                err = oracle::relative_error(analytic[i], central(pred, i, e, f), 1e-6);
                if (err < 1e-4)
                    ++refined;
            }
            if (kinks && err >= 1e-4)
            {
                // A rectifier switching inside [x - eps, x + eps] makes the
                // loss non-differentiable there; detect it by one-sided
                // quotients that disagree.
                Grid<double> up = pred.grid(), down = pred.grid();
                up[i] += eps;
                down[i] -= eps;
                const double f0 = f(pred);
                const double fwd = (f(GrayImage::clamped(std::move(up))) - f0) / eps;
                const double bwd = (f0 - f(GrayImage::clamped(std::move(down)))) / eps;
                if (oracle::relative_error(fwd, bwd, 1e-6) > 1e-3)
                {
                    ++skipped;
                    continue;
                }
            }
            worst[k] = std::max(worst[k], err);
        }
    };
    for (int trial = 0; trial < 50; ++trial)
    {
        const GrayImage pred = oracle::random_generic_image(rng, 6, 6, 0.01, 0.99);
        const GrayImage gray_gt = oracle::random_generic_image(rng, 6, 6, 0.01, 0.99);
        const GrayImage gt = to_image(oracle::random_mask(rng, 6, 6));
        const double sat_eps = std::min(1e-4, 0.5 * oracle::min_value_gap(pred));

        check(0, pred, sat_eps, sat_loss(pred, gray_gt).loss.gradient,
              [&](const GrayImage& x) { return sat_loss(x, gray_gt).loss.value; }, false);
        check(1, pred, 1e-5, perceptual_topo_loss(pred, gray_gt, fx).gradient,
              [&](const GrayImage& x) { return perceptual_topo_loss(x, gray_gt, fx).value; }, true);
        check(2, pred, 1e-5, bce_loss(pred, gt).gradient, [&](const GrayImage& x) { return bce_loss(x, gt).value; },
              false);
        check(3, pred, sat_eps, total_loss(pred, gt, cfg, fx).total.gradient,
              [&](const GrayImage& x) { return total_loss(x, gt, cfg, fx).total.value; }, true);
    }
    const double m = std::max({worst[0], worst[1], worst[2], worst[3]});
    std::ostringstream s;
    s << "max rel err sat " << worst[0] << ", tc " << worst[1] << ", bce " << worst[2] << ", total " << worst[3]
      << "; cells refined " << refined << ", kink cells skipped " << skipped;
    return {m < 1e-4, s.str()};
}

// Every loss and metric at its optimum when prediction equals truth.
Outcome zero_at_truth()
{
    std::mt19937_64 rng(5);
    const FeatureExtractor fx = default_extractor();
    double worst_value = 0.0, worst_grad = 0.0;
    auto record = [&](const LossResult& r) {
        worst_value = std::max(worst_value, r.value);
        for (double g : r.gradient.values())
            worst_grad = std::max(worst_grad, std::abs(g));
    };
    for (int trial = 0; trial < 20; ++trial)
    {
        const GrayImage x = oracle::random_generic_image(rng, 8, 8);
        record(sat_loss(x, x).loss);
        record(perceptual_topo_loss(x, x, fx));
        BinaryMask m = oracle::random_mask(rng, 8, 8);
        m[0] = 1;
        m[1] = 0;  // both classes present
        const GrayImage b = to_image(m);
        record(sat_loss(b, b).loss);
        record(perceptual_topo_loss(b, b, fx));
        record(bce_loss(b, b));
        record(total_loss(b, b, LossConfig{}, fx).total);

        const PixelMetrics pm = pixel_metrics(confusion(m, m));
        if (cldice(m, m) != 1.0 || betti_error(m, m) != BettiError{0, 0} || pm.dice != 1.0 || pm.mcc != 1.0)
            return {false, "metric not at optimum on trial " + std::to_string(trial)};
    }
    const bool ok = worst_value <= 1e-6 && worst_grad <= 1e-6;
    return {ok, fmt("max loss %.3g, max |grad| %.3g; cldice/betti/dice/mcc optimal", worst_value, worst_grad)};
}

Outcome default_hyperparameters()
{
    const RunConfig c;
    const bool ok = c.lambda_c == 10.0 && c.lambda_i == 0.5 && c.lambda_tc == 0.05 && c.lambda_ts == 0.0002 &&
                    c.q == 2.0 && GanWeights{}.lambda_c == 10.0 && GanWeights{}.lambda_i == 0.5 &&
                    LossConfig{}.lambda_tc == 0.05 && LossConfig{}.lambda_ts == 0.0002 && MatchConfig{}.q == 2.0;
    return {ok, "lambda_c=10 lambda_i=0.5 lambda_tc=0.05 lambda_ts=0.0002 q=2"};
}

Outcome gan_identities()
{
    const ImageMap id = [](const GrayImage& x) { return x; };
    auto constant = [](double v) {
        return ScoreMap([v](const GrayImage& x) { return ScoreGrid(x.height(), x.width(), v); });
    };
    std::mt19937_64 rng(3);
    const GrayImage real = oracle::random_generic_image(rng, 8, 8);
    const GrayImage fake = oracle::random_generic_image(rng, 8, 8);
    const GeneratorObjective g = generator_objective(real, id, id, constant(1.0));
    const ScoreMap perfect = [&](const GrayImage& x) { return ScoreGrid(4, 4, x == real ? 1.0 : 0.0); };
    const double d1 = discriminator_objective(real, fake, constant(1.0));
    const double d0 = discriminator_objective(real, fake, constant(0.0));
    const double dp = discriminator_objective(real, fake, perfect);
    const bool ok = g.cycle == 0.0 && g.identity == 0.0 && d1 == 0.5 && d0 == 0.5 && dp == 0.0;
    std::ostringstream s;
    s << "cycle " << g.cycle << ", identity " << g.identity << ", D=1 " << d1 << ", D=0 " << d0 << ", perfect " << dp;
    return {ok, s.str()};
}

std::vector<std::size_t> betti1_history(const fs::path& csv)
{
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    std::vector<std::size_t> out;
    while (std::getline(in, line))
        out.push_back(std::stoul(line.substr(line.rfind(',') + 1)));
    return out;
}

// Broken ring repaired by the topology-aware objective, not by BCE alone.
Outcome topology_repair()
{
    const fs::path dir = fs::temp_directory_path() / "toposeg_acceptance_repair";
    fs::remove_all(dir);
    fs::create_directories(dir);
    save_pgm(fixtures::ring32(), dir / "gt.pgm");
    save_pgm(fixtures::ring32_with_gap(0.3), dir / "init.pgm");

    constexpr std::size_t iters = 500;
    constexpr double step = 0.1;
    std::ostringstream sink;
    auto run = [&](RunConfig cfg, const std::string& name) {
        cfg.out_dir = (dir / name).string();
        cli::Context ctx{cfg, sink, std::cerr};
        if (cli::cmd_optimize(ctx, dir / "init.pgm", dir / "gt.pgm", iters, step) != cli::kOk)
            throw std::runtime_error("optimize failed");
        return betti1_history(dir / name / "optimize.csv");
    };
    const auto with_topo = run(RunConfig{}, "default");
    RunConfig ablated;
    ablated.lambda_tc = ablated.lambda_ts = 0.0;
    const auto bce_only = run(ablated, "bce_only");

    const auto first_zero = std::find(with_topo.begin(), with_topo.end(), 0u);
    const bool repaired = with_topo.back() == 0 && first_zero != with_topo.end();
    const bool bce_closes = std::find(bce_only.begin(), bce_only.end(), 0u) != bce_only.end();
    std::ostringstream s;
    s << "step " << step << "; defaults: betti1_err " << with_topo.front() << " -> " << with_topo.back();
    if (first_zero != with_topo.end())
        s << " (first 0 at iter " << (first_zero - with_topo.begin()) << ")";
    s << "; lambda_tc=lambda_ts=0: betti1_err " << bce_only.front() << " -> " << bce_only.back();
    return {repaired && !bce_closes, s.str()};
}

Outcome performance()
{
    std::mt19937_64 rng(768);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Grid<double> g(768, 768);
    for (double& v : g.values())
        v = u(rng);
    const GrayImage img(std::move(g));
    const auto t0 = std::chrono::steady_clock::now();
    const PersistenceDiagram d = compute_diagram(img);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {secs < 5.0, fmt("768x768 uniform noise: %.3f s, %.0f pairs", secs, double(d.pairs.size()))};
}

}  // namespace

int main()
{
    criterion("persistence/oracle equivalence", 10, persistence_equivalence);
    criterion("matching optimality", 30, matching_optimality);
    criterion("gradient correctness", 60, gradient_correctness);
    criterion("zero-at-truth", 0, zero_at_truth);
    criterion("default hyperparameters", 0, default_hyperparameters);
    criterion("GAN objective identities", 0, gan_identities);
    criterion("topology-repair demo", 120, topology_repair);
    criterion("performance sanity", 0, performance);
    std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
