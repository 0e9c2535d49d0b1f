// Command-line frontend: explain / evaluate / sweep plus generators for
// models, datasets, and mask bundles. Every command is a pure function of its
// input files and flags; outputs are byte-identical across runs and across
// --workers settings.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geex/geex.hpp"

namespace fs = std::filesystem;
using namespace geex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitShape = 3;
constexpr int kExitCapability = 4;
constexpr int kExitNumeric = 5;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::ShapeMismatch:
        case ErrorKind::NotTwoDimensional:
            return kExitShape;
        case ErrorKind::NotWhiteBox:
            return kExitCapability;
        case ErrorKind::ZeroConfidence:
        case ErrorKind::NonFiniteInput:
            return kExitNumeric;
        default:
            return kExitUsage;
    }
}

Grid load_input(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
        return read_pgm(path);
    return read_grid_csv(path);
}

Method parse_method(const std::string& s) {
    if (s == "geex") return Method::GeexMerged;
    if (s == "geex-interp") return Method::GeexInterpolated;
    if (s == "ge") return Method::Ge;
    if (s == "ig") return Method::Ig;
    if (s == "smoothgrad") return Method::SmoothGrad;
    if (s == "random") return Method::Random;
    raise(ErrorKind::ParseError, "unknown method '" + s + "'");
}

// Shared explainer flags; added to the subcommands that run explainers.
struct ExplainFlags {
    std::string method = "geex";
    int n_star = 5000;
    double sigma = 1.0;
    int s_steps = 5;
    std::string mirror = "on";
    std::string smooth_kernel;  // SIZE:SIGMA
    std::string baseline = "zeros";
    std::string alpha = "stratified";
    std::uint64_t seed = 0;
    int class_idx = -1;
    int workers = 1;

    void attach(CLI::App* cmd, bool with_method = true) {
        if (with_method)
            cmd->add_option("--method", method,
                            "geex|geex-interp|ge|ig|smoothgrad|random");
        cmd->add_option("--n-star", n_star, "query budget");
        cmd->add_option("--sigma", sigma, "search distribution deviation");
        cmd->add_option("--s-steps", s_steps, "interpolation steps (geex-interp)");
        cmd->add_option("--mirror", mirror, "on|off")
            ->check(CLI::IsMember({"on", "off"}));
        cmd->add_option("--smooth-kernel", smooth_kernel, "mask smoothing SIZE:SIGMA");
        cmd->add_option("--baseline", baseline, "zeros|blur|file:PATH");
        cmd->add_option("--alpha", alpha, "iid|stratified")
            ->check(CLI::IsMember({"iid", "stratified"}));
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--class", class_idx, "target class (-1 = argmax)");
        cmd->add_option("--workers", workers, "query fan-out threads");
    }

    ExplainConfig to_config(const Grid& x) const {
        ExplainConfig cfg;
        cfg.n_star = n_star;
        cfg.sigma = sigma;
        cfg.s_steps = s_steps;
        cfg.mirrored = mirror == "on";
        cfg.alpha_mode = alpha == "iid" ? AlphaMode::IidUniform : AlphaMode::Stratified;
        cfg.seed = seed;
        cfg.class_idx = class_idx;
        cfg.workers = workers;
        if (!smooth_kernel.empty()) {
            const auto colon = smooth_kernel.find(':');
            if (colon == std::string::npos)
                raise(ErrorKind::ParseError, "--smooth-kernel expects SIZE:SIGMA");
            cfg.smoothing = make_gaussian_kernel(
                std::stoi(smooth_kernel.substr(0, colon)),
                std::stod(smooth_kernel.substr(colon + 1)));
        }
        if (baseline == "zeros") {
            cfg.baseline_kind = BaselineKind::Zeros;
        } else if (baseline == "blur") {
            cfg.baseline_kind = BaselineKind::BlurredExplicand;
        } else if (baseline.rfind("file:", 0) == 0) {
            cfg.baseline_kind = BaselineKind::Custom;
            cfg.custom_baseline = load_input(baseline.substr(5));
        } else {
            raise(ErrorKind::ParseError, "--baseline expects zeros|blur|file:PATH");
        }
        (void)x;
        return cfg;
    }
};

void write_meta(const std::string& path, const Attribution& a,
                const ExplainFlags& flags) {
    std::ofstream out(path);
    out << "method=" << method_name(a.method) << "\n"
        << "seed=" << a.seed << "\n"
        << "n_star=" << flags.n_star << "\n"
        << "sigma=" << format_double(flags.sigma) << "\n"
        << "baseline=" << flags.baseline << "\n"
        << "class=" << a.class_idx << "\n"
        << "n_queries=" << a.n_queries << "\n";
    if (a.completeness_residual)
        out << "completeness_residual=" << format_double(*a.completeness_residual)
            << "\n";
    for (const std::string& note : a.notes) out << "note=" << note << "\n";
}

int cmd_explain(const std::string& model_path, const std::string& input_path,
                const std::string& out_dir, const std::string& masks_path,
                const ExplainFlags& flags) {
    ModelPtr model = load_model(model_path);
    Grid x = load_input(input_path);
    fs::create_directories(out_dir);

    Attribution a;
    const Method method = parse_method(flags.method);
    if (!masks_path.empty() && method == Method::GeexMerged) {
        MaskSet ms = load_mask_set(masks_path);
        ExplainConfig cfg = flags.to_config(x);
        a = geex_merged_with_masks(*model, x, resolve_baseline(cfg, x), ms,
                                   cfg.class_idx, cfg.workers);
    } else {
        a = explain(method, *model, x, flags.to_config(x));
    }

    write_attribution_csv(out_dir + "/attribution.csv", a.xi);
    const std::size_t rows = a.xi.shape.size() == 2 ? a.xi.shape[0] : 1;
    const std::size_t cols = a.xi.shape.size() == 2 ? a.xi.shape[1] : a.xi.size();
    write_pgm(out_dir + "/attribution.pgm", attribution_heatmap(a.xi), rows, cols);
    write_meta(out_dir + "/meta.txt", a, flags);
    return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& input_path,
                 const std::string& out_dir, const std::vector<std::string>& methods,
                 const std::vector<std::string>& replacements, int l, int seed_count,
                 const ExplainFlags& flags) {
    ModelPtr model = load_model(model_path);
    Grid x = load_input(input_path);
    fs::create_directories(out_dir);

    std::vector<Replacement> reps;
    for (const std::string& r : replacements) {
        if (r == "baseline") reps.push_back(Replacement::Baseline);
        else if (r == "gaussian") reps.push_back(Replacement::Gaussian);
        else raise(ErrorKind::ParseError, "--replacement expects baseline|gaussian");
    }
    if (reps.empty()) reps.push_back(Replacement::Baseline);

    std::vector<NamedExplainer> explainers;
    for (const std::string& m : methods) explainers.push_back({m, parse_method(m)});
    if (explainers.empty()) explainers.push_back({"geex", Method::GeexMerged});

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < std::max(1, seed_count); ++i)
        seeds.push_back(flags.seed + static_cast<std::uint64_t>(i));

    const ExplainConfig base_cfg = flags.to_config(x);
    const int steps = l > 0 ? l : static_cast<int>(x.size());

    // per-step curves for the first explainer under each replacement
    for (Replacement rep : reps) {
        ExplainConfig cfg = base_cfg;
        cfg.seed = seeds[0];
        Attribution a = explain(explainers[0].method, *model, x, cfg);
        DeletionCurve curve = deletion_curve(*model, x, a, steps, rep, seeds[0]);
        const std::string name = reps.size() == 1
                                     ? "curve.csv"
                                     : "curve_" + replacement_name(rep) + ".csv";
        std::ofstream out(out_dir + "/" + name);
        out << "step,ratio\n";
        for (std::size_t i = 0; i < curve.ratios.size(); ++i)
            out << (i + 1) << "," << format_double(curve.ratios[i]) << "\n";
    }

    std::vector<AopcCell> cells =
        aopc_table(*model, {x}, explainers, reps, base_cfg, seeds, steps);
    std::ofstream out(out_dir + "/aopc.csv");
    out << "method,replacement,mean,std,seeds\n";
    for (const AopcCell& c : cells) {
        if (c.failed) {
            out << c.method << "," << c.replacement << ",failed,,\"" << c.error
                << "\"\n";
            continue;
        }
        out << c.method << "," << c.replacement << "," << format_double(c.mean) << ","
            << format_double(c.stddev) << "," << c.seeds << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const std::string& model_path, const std::string& input_path,
              const std::string& out_path, const std::string& budgets_csv,
              int seed_count, const ExplainFlags& flags) {
    ModelPtr model = load_model(model_path);
    Grid x = load_input(input_path);

    std::vector<int> budgets;
    std::stringstream ss(budgets_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) budgets.push_back(std::stoi(tok));
    if (budgets.empty()) raise(ErrorKind::BadBudgetList, "--budgets is empty");

    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < std::max(1, seed_count); ++i)
        seeds.push_back(flags.seed + static_cast<std::uint64_t>(i));

    SweepResult result =
        convergence_sweep(*model, x, budgets, flags.to_config(x), seeds);

    std::ofstream out(out_path);
    out << "budget,mean_rel_l2,std,mean_aopc\n";
    for (const SweepPoint& p : result.points)
        out << p.budget << "," << format_double(p.mean_rel_l2) << ","
            << format_double(p.std_rel_l2) << "," << format_double(p.mean_aopc)
            << "\n";
    return kExitOk;
}

LabeledDataset read_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
    LabeledDataset ds;
    ds.input_shape = {8, 8};
    ds.num_classes = 2;
    ds.class_patches.resize(2);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != 65)
            raise(ErrorKind::ParseError, path + ":" + std::to_string(lineno) +
                                             ": expected label + 64 pixels");
        ds.labels.push_back(static_cast<int>(row[0]));
        ds.inputs.emplace_back(ds.input_shape,
                               std::vector<double>(row.begin() + 1, row.end()));
    }
    if (ds.inputs.empty()) raise(ErrorKind::EmptyDataset, path + ": no samples");
    return ds;
}

int cmd_gen_data(int n, double noise, std::uint64_t seed, const std::string& out) {
    LabeledDataset ds = gen_synthetic_dataset(n, noise, seed);
    std::ofstream f(out);
    if (!f) raise(ErrorKind::ParseError, "cannot open '" + out + "' for writing");
    f << "# two_blob_8x8 n=" << n << " noise=" << format_double(noise)
      << " seed=" << seed << "\n";
    for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
        f << ds.labels[i];
        for (double v : ds.inputs[i].data) f << "," << format_double(v);
        f << "\n";
    }
    std::ofstream meta(out + ".meta");
    for (int c = 0; c < 2; ++c) {
        meta << "class" << c << "_patch=";
        for (std::size_t j = 0; j < ds.class_patches[c].size(); ++j)
            meta << (j ? " " : "") << ds.class_patches[c][j];
        meta << "\n";
    }
    return kExitOk;
}

int cmd_gen_model(const std::string& analytic, const std::string& train_path,
                  const std::string& arch, int epochs, double lr,
                  std::uint64_t seed, bool black_box, const std::string& out) {
    if (!analytic.empty()) {
        ModelPtr m;
        if (analytic == "sigmoid1d") m = std::make_shared<Sigmoid1dModel>();
        else if (analytic == "sigmoid_of_x_only_2d")
            m = std::make_shared<SigmoidOfXOnly2dModel>();
        else raise(ErrorKind::ParseError, "unknown analytic model '" + analytic + "'");
        save_model(*m, out, black_box);
        return kExitOk;
    }
    if (train_path.empty())
        raise(ErrorKind::ParseError, "gen-model needs --analytic or --train");
    LabeledDataset ds = read_labeled_csv(train_path);
    std::vector<int> hidden;
    std::stringstream ss(arch);
    std::string tok;
    while (std::getline(ss, tok, ',')) hidden.push_back(std::stoi(tok));
    TrainResult tr = train_toy(ds, hidden, epochs, lr, seed);
    std::cerr << "training accuracy: " << tr.train_accuracy << "\n";
    save_model(*tr.net, out, black_box);
    return kExitOk;
}

int cmd_gen_masks(const std::string& shape_str, const ExplainFlags& flags,
                  const std::string& out) {
    Shape shape;
    std::stringstream ss(shape_str);
    std::string tok;
    while (std::getline(ss, tok, 'x')) shape.push_back(std::stoul(tok));
    if (shape.empty()) raise(ErrorKind::ParseError, "--shape expects e.g. 8x8");
    Grid probe(shape);
    ExplainConfig cfg = flags.to_config(probe);
    SearchDistribution dist(cfg.sigma, shape);
    MaskSet ms = generate_mask_set(dist, cfg.n_star, cfg.seed, cfg.mirrored,
                                   cfg.smoothing, cfg.alpha_mode);
    save_mask_set(out, ms, shape);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GEEX feature-attribution toolkit"};
    app.require_subcommand(1);

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "compute an attribution");
    std::string model_path, input_path, out_dir, masks_path;
    ExplainFlags eflags;
    explain_cmd->add_option("--model", model_path)->required();
    explain_cmd->add_option("--input", input_path)->required();
    explain_cmd->add_option("--out", out_dir)->required();
    explain_cmd->add_option("--masks", masks_path, "pre-generated mask bundle");
    eflags.attach(explain_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "deletion curves and AOPC");
    std::string ev_model, ev_input, ev_out;
    std::vector<std::string> ev_methods, ev_replacements;
    int ev_l = 0, ev_seeds = 1;
    ExplainFlags evflags;
    eval_cmd->add_option("--model", ev_model)->required();
    eval_cmd->add_option("--input", ev_input)->required();
    eval_cmd->add_option("--out", ev_out)->required();
    eval_cmd->add_option("--method", ev_methods)->take_all();
    eval_cmd->add_option("--replacement", ev_replacements)->take_all();
    eval_cmd->add_option("--l", ev_l, "deletion steps (default: all features)");
    eval_cmd->add_option("--seeds", ev_seeds, "number of seeds");
    evflags.attach(eval_cmd, /*with_method=*/false);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "convergence toward IG");
    std::string sw_model, sw_input, sw_out, sw_budgets;
    int sw_seeds = 1;
    ExplainFlags swflags;
    sweep_cmd->add_option("--model", sw_model)->required();
    sweep_cmd->add_option("--input", sw_input)->required();
    sweep_cmd->add_option("--out", sw_out)->required();
    sweep_cmd->add_option("--budgets", sw_budgets)->required();
    sweep_cmd->add_option("--seeds", sw_seeds, "number of seeds");
    swflags.attach(sweep_cmd, /*with_method=*/false);

    // gen-data
    auto* gd_cmd = app.add_subcommand("gen-data", "synthetic two-blob dataset");
    int gd_n = 512;
    double gd_noise = 0.1;
    std::uint64_t gd_seed = 13;
    std::string gd_out, gd_kind = "two_blob_8x8";
    gd_cmd->add_option("--kind", gd_kind)->check(CLI::IsMember({"two_blob_8x8"}));
    gd_cmd->add_option("--n", gd_n);
    gd_cmd->add_option("--noise", gd_noise);
    gd_cmd->add_option("--seed", gd_seed);
    gd_cmd->add_option("--out", gd_out)->required();

    // gen-model
    auto* gm_cmd = app.add_subcommand("gen-model", "train or emit a model file");
    std::string gm_analytic, gm_train, gm_arch = "16", gm_out;
    int gm_epochs = 300;
    double gm_lr = 2.0;
    std::uint64_t gm_seed = 13;
    bool gm_black_box = false;
    gm_cmd->add_option("--analytic", gm_analytic, "sigmoid1d|sigmoid_of_x_only_2d");
    gm_cmd->add_option("--train", gm_train, "dataset CSV to train on");
    gm_cmd->add_option("--arch", gm_arch, "hidden layer sizes, comma separated");
    gm_cmd->add_option("--epochs", gm_epochs);
    gm_cmd->add_option("--lr", gm_lr);
    gm_cmd->add_option("--seed", gm_seed);
    gm_cmd->add_flag("--black-box", gm_black_box, "strip the gradient capability");
    gm_cmd->add_option("--out", gm_out)->required();

    // gen-masks
    auto* gk_cmd = app.add_subcommand("gen-masks", "pre-generate a mask bundle");
    std::string gk_shape = "8x8", gk_out;
    ExplainFlags gkflags;
    gk_cmd->add_option("--shape", gk_shape, "mask shape, e.g. 8x8 or 64");
    gk_cmd->add_option("--out", gk_out)->required();
    gkflags.attach(gk_cmd, /*with_method=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*explain_cmd)
            return cmd_explain(model_path, input_path, out_dir, masks_path, eflags);
        if (*eval_cmd)
            return cmd_evaluate(ev_model, ev_input, ev_out, ev_methods,
                                ev_replacements, ev_l, ev_seeds, evflags);
        if (*sweep_cmd)
            return cmd_sweep(sw_model, sw_input, sw_out, sw_budgets, sw_seeds, swflags);
        if (*gd_cmd) return cmd_gen_data(gd_n, gd_noise, gd_seed, gd_out);
        if (*gm_cmd)
            return cmd_gen_model(gm_analytic, gm_train, gm_arch, gm_epochs, gm_lr,
                                 gm_seed, gm_black_box, gm_out);
        if (*gk_cmd) return cmd_gen_masks(gk_shape, gkflags, gk_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
