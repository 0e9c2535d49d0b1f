#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geex/errors.hpp"
#include "geex/grid.hpp"
#include "geex/model.hpp"
#include "geex/parallel.hpp"
#include "geex/rng.hpp"
#include "geex/sampling.hpp"

namespace geex {

enum class Method { Ge, GeexInterpolated, GeexMerged, Ig, SmoothGrad, Random };

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Ge: return "ge";
        case Method::GeexInterpolated: return "geex-interp";
        case Method::GeexMerged: return "geex";
        case Method::Ig: return "ig";
        case Method::SmoothGrad: return "smoothgrad";
        case Method::Random: return "random";
    }
    return "?";
}

enum class BaselineKind { Zeros, BlurredExplicand, Custom };

struct ExplainConfig {
    double sigma = 1.0;
    int n_star = 5000;
    int s_steps = 5;             // interpolated variant only
    bool mirrored = true;
    std::optional<Kernel> smoothing;
    BaselineKind baseline_kind = BaselineKind::Zeros;
    Grid custom_baseline;
    int baseline_blur_size = 5;  // blurred-explicand baseline kernel
    double baseline_blur_sigma = 0.7;
    AlphaMode alpha_mode = AlphaMode::Stratified;
    std::uint64_t seed = 0;
    int class_idx = -1;          // -1: argmax at the explicand
    bool fresh_masks_per_step = false;  // interpolated ablation
    int workers = 1;
};

struct Attribution {
    Grid xi;
    Grid baseline;
    int class_idx = 0;
    long n_queries = 0;
    std::optional<double> completeness_residual;  // path methods only
    Method method = Method::GeexMerged;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;

    double total() const {
        double acc = 0.0;
        for (double v : xi.data) acc += v;
        return acc;
    }
};

inline Grid resolve_baseline(const ExplainConfig& cfg, const Grid& x) {
    switch (cfg.baseline_kind) {
        case BaselineKind::Zeros:
            return Grid(x.shape);
        case BaselineKind::BlurredExplicand:
            return gaussian_blur(x, cfg.baseline_blur_size, cfg.baseline_blur_sigma);
        case BaselineKind::Custom:
            require_same_shape(cfg.custom_baseline, x, "baseline");
            return cfg.custom_baseline;
    }
    return Grid(x.shape);
}

namespace detail {

// xi_l = diff_l * factor * acc_l, with an exact +0 when diff_l is zero so
// Missingness holds bitwise.
inline Grid attribution_from_sum(const Grid& diff, const Grid& acc, double factor) {
    Grid xi(diff.shape);
    for (std::size_t i = 0; i < xi.size(); ++i)
        xi[i] = diff[i] == 0.0 ? 0.0 : diff[i] * factor * acc[i];
    return xi;
}

inline bool bitwise_equal(const Grid& a, const Grid& b) {
    return a.shape == b.shape && a.data == b.data;
}

// Evaluate f(z_i) for i in [0, n): z built per index by make_query, class
// score selected, results reduced by the caller in index order. The fan-out
// never changes the output because every slot is written independently.
template <typename MakeQuery>
std::vector<double> evaluate_queries(const QueryModel& m, int class_idx,
                                     std::size_t n, int workers,
                                     MakeQuery&& make_query) {
    std::vector<double> fs(n);
    parallel_for(n, workers, [&](std::size_t i) {
        fs[i] = m.checked_query(make_query(i))[static_cast<std::size_t>(class_idx)];
    });
    return fs;
}

}  // namespace detail

// Raw Monte Carlo gradient estimate at x: xi = (1/n) sum f(x + eps) score(eps).
// No baseline, no path; kept as the reference point for what the path
// integration fixes.
inline Attribution ge_estimate(const QueryModel& m, const Grid& x,
                               const ExplainConfig& cfg) {
    if (cfg.n_star < 2) raise(ErrorKind::BudgetTooSmall, "ge_estimate needs n >= 2");
    const int class_idx = select_class(m, x, cfg.class_idx);
    SearchDistribution dist(cfg.sigma, x.shape);
    MaskSet ms = generate_mask_set(dist, cfg.n_star, cfg.seed, cfg.mirrored,
                                   cfg.smoothing, cfg.alpha_mode);

    std::vector<double> fs = detail::evaluate_queries(
        m, class_idx, ms.size(), cfg.workers,
        [&](std::size_t i) { return add(x, ms.masks[i]); });

    Grid acc(x.shape);
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (std::size_t j = 0; j < acc.size(); ++j)
            acc[j] += fs[i] * ms.scores[i][j];

    Attribution out;
    out.xi = scale(acc, 1.0 / static_cast<double>(ms.size()));
    out.baseline = Grid(x.shape);
    out.class_idx = class_idx;
    out.n_queries = static_cast<long>(ms.size());
    out.method = Method::Ge;
    out.seed = cfg.seed;
    out.notes.push_back("ge: s_steps and baseline settings ignored");
    return out;
}

// Merged form (the default): one (eps, alpha) pair per query, summed densely
// along the path. xi = ((x - baseline)/n*) o sum f(x(alpha) + eps) score(eps).
inline Attribution geex_merged_with_masks(const QueryModel& m, const Grid& x,
                                          const Grid& baseline, const MaskSet& ms,
                                          int requested_class, int workers = 1) {
    const int class_idx = select_class(m, x, requested_class);
    require_same_shape(baseline, x, "geex_merged");

    Attribution out;
    out.baseline = baseline;
    out.class_idx = class_idx;
    out.method = Method::GeexMerged;
    out.seed = ms.seed;

    if (detail::bitwise_equal(x, baseline)) {
        out.xi = Grid(x.shape);
        out.completeness_residual = 0.0;
        out.n_queries = 0;
        return out;
    }

    std::vector<double> fs = detail::evaluate_queries(
        m, class_idx, ms.size(), workers, [&](std::size_t i) {
            return add(interpolate(baseline, x, ms.alphas[i]), ms.masks[i]);
        });

    Grid acc(x.shape);
    for (std::size_t i = 0; i < ms.size(); ++i)
        for (std::size_t j = 0; j < acc.size(); ++j)
            acc[j] += fs[i] * ms.scores[i][j];

    const Grid diff = sub(x, baseline);
    out.xi = detail::attribution_from_sum(diff, acc, 1.0 / static_cast<double>(ms.size()));
    out.n_queries = static_cast<long>(ms.size());

    const double fx = m.checked_query(x)[static_cast<std::size_t>(class_idx)];
    const double fb = m.checked_query(baseline)[static_cast<std::size_t>(class_idx)];
    out.completeness_residual = (fx - fb) - out.total();
    return out;
}

inline Attribution geex_merged(const QueryModel& m, const Grid& x,
                               const ExplainConfig& cfg) {
    SearchDistribution dist(cfg.sigma, x.shape);
    MaskSet ms = generate_mask_set(dist, cfg.n_star, cfg.seed, cfg.mirrored,
                                   cfg.smoothing, cfg.alpha_mode);
    return geex_merged_with_masks(m, x, resolve_baseline(cfg, x), ms,
                                  cfg.class_idx, cfg.workers);
}

// Two-level form: s interpolation steps, an n-sample estimator per step.
// By default one pre-generated n-mask subset is reused at every step; the
// fresh-per-step variant exists so equal-budget comparisons stay fair.
inline Attribution geex_interpolated(const QueryModel& m, const Grid& x,
                                     const ExplainConfig& cfg) {
    if (cfg.s_steps < 1) raise(ErrorKind::BadBudget, "s_steps must be >= 1");
    if (cfg.n_star % cfg.s_steps != 0)
        raise(ErrorKind::BudgetNotDivisible,
              "n_star=" + std::to_string(cfg.n_star) + " not divisible by s_steps=" +
                  std::to_string(cfg.s_steps));
    const int n = cfg.n_star / cfg.s_steps;
    const int s = cfg.s_steps;
    const int class_idx = select_class(m, x, cfg.class_idx);
    const Grid baseline = resolve_baseline(cfg, x);

    Attribution out;
    out.baseline = baseline;
    out.class_idx = class_idx;
    out.method = Method::GeexInterpolated;
    out.seed = cfg.seed;

    if (detail::bitwise_equal(x, baseline)) {
        out.xi = Grid(x.shape);
        out.completeness_residual = 0.0;
        out.n_queries = 0;
        return out;
    }

    SearchDistribution dist(cfg.sigma, x.shape);
    std::vector<MaskSet> per_step;
    if (cfg.fresh_masks_per_step) {
        for (int j = 0; j < s; ++j)
            per_step.push_back(generate_mask_set(
                dist, n, detail::mix64(cfg.seed + static_cast<std::uint64_t>(j) + 1),
                cfg.mirrored, cfg.smoothing, cfg.alpha_mode));
    } else {
        per_step.push_back(generate_mask_set(dist, n, cfg.seed, cfg.mirrored,
                                             cfg.smoothing, cfg.alpha_mode));
    }

    const std::size_t total = static_cast<std::size_t>(n) * s;
    std::vector<double> fs = detail::evaluate_queries(
        m, class_idx, total, cfg.workers, [&](std::size_t idx) {
            const std::size_t j = idx / n;
            const std::size_t i = idx % n;
            const MaskSet& ms = per_step[cfg.fresh_masks_per_step ? j : 0];
            const double alpha = static_cast<double>(j + 1) / s;
            return add(interpolate(baseline, x, alpha), ms.masks[i]);
        });

    Grid acc(x.shape);
    for (std::size_t idx = 0; idx < total; ++idx) {
        const std::size_t j = idx / n;
        const std::size_t i = idx % n;
        const MaskSet& ms = per_step[cfg.fresh_masks_per_step ? j : 0];
        for (std::size_t k = 0; k < acc.size(); ++k)
            acc[k] += fs[idx] * ms.scores[i][k];
    }

    const Grid diff = sub(x, baseline);
    out.xi = detail::attribution_from_sum(diff, acc, 1.0 / static_cast<double>(total));
    out.n_queries = static_cast<long>(total);

    const double fx = m.checked_query(x)[static_cast<std::size_t>(class_idx)];
    const double fb = m.checked_query(baseline)[static_cast<std::size_t>(class_idx)];
    out.completeness_residual = (fx - fb) - out.total();
    return out;
}

// White-box reference: right-endpoint Riemann sum of actual gradients over
// the straightline path.
inline Attribution ig_reference(const QueryModel& m, const Grid& x,
                                const Grid& baseline, int steps, int class_idx,
                                int workers = 1) {
    if (!m.white_box()) raise(ErrorKind::NotWhiteBox, "ig_reference needs gradients");
    if (steps < 1) raise(ErrorKind::BadBudget, "steps must be >= 1");
    const int cls = select_class(m, x, class_idx);
    require_same_shape(baseline, x, "ig_reference");

    Attribution out;
    out.baseline = baseline;
    out.class_idx = cls;
    out.method = Method::Ig;

    if (detail::bitwise_equal(x, baseline)) {
        out.xi = Grid(x.shape);
        out.completeness_residual = 0.0;
        return out;
    }

    std::vector<Grid> grads(static_cast<std::size_t>(steps));
    parallel_for(static_cast<std::size_t>(steps), workers, [&](std::size_t j) {
        const double alpha = static_cast<double>(j + 1) / steps;
        grads[j] = m.gradient(interpolate(baseline, x, alpha), cls);
    });
    Grid acc(x.shape);
    for (const Grid& g : grads) acc = add(acc, g);

    const Grid diff = sub(x, baseline);
    out.xi = detail::attribution_from_sum(diff, acc, 1.0 / steps);
    out.n_queries = steps;

    const double fx = m.checked_query(x)[static_cast<std::size_t>(cls)];
    const double fb = m.checked_query(baseline)[static_cast<std::size_t>(cls)];
    out.completeness_residual = (fx - fb) - out.total();
    return out;
}

// White-box reference: average gradient under Gaussian input noise.
inline Attribution smoothgrad_reference(const QueryModel& m, const Grid& x, int n,
                                        double sigma, std::uint64_t seed,
                                        int class_idx, bool mirrored = false,
                                        int workers = 1) {
    if (!m.white_box()) raise(ErrorKind::NotWhiteBox, "smoothgrad needs gradients");
    if (n < 1) raise(ErrorKind::BudgetTooSmall, "smoothgrad needs n >= 1");
    if (mirrored && n % 2 != 0)
        raise(ErrorKind::OddWithMirror, "mirrored smoothgrad requires even n");
    const int cls = select_class(m, x, class_idx);
    SearchDistribution dist(sigma, x.shape);

    std::vector<Grid> grads(static_cast<std::size_t>(n));
    const int pair_span = mirrored ? 2 : 1;
    parallel_for(static_cast<std::size_t>(n / pair_span), workers, [&](std::size_t k) {
        const Grid eps = detail::draw_raw_mask(dist, seed, k);
        if (mirrored) {
            grads[2 * k] = m.gradient(add(x, eps), cls);
            grads[2 * k + 1] = m.gradient(sub(x, eps), cls);
        } else {
            grads[k] = m.gradient(add(x, eps), cls);
        }
    });
    Grid acc(x.shape);
    for (const Grid& g : grads) acc = add(acc, g);

    Attribution out;
    out.xi = scale(acc, 1.0 / n);
    out.baseline = Grid(x.shape);
    out.class_idx = cls;
    out.n_queries = n;
    out.method = Method::SmoothGrad;
    out.seed = seed;
    return out;
}

// Seeded uniform noise; only meaningful as a deletion-order reference.
inline Attribution random_reference(const Shape& shape, std::uint64_t seed) {
    CounterRng rng(seed, 0x52414e44ULL);
    Attribution out;
    out.xi = Grid(shape);
    for (double& v : out.xi.data) v = rng.uniform();
    out.baseline = Grid(shape);
    out.method = Method::Random;
    out.seed = seed;
    return out;
}

// Dispatch by method enum; used by the CLI and the evaluation table.
inline Attribution explain(Method method, const QueryModel& m, const Grid& x,
                           const ExplainConfig& cfg) {
    switch (method) {
        case Method::Ge: return ge_estimate(m, x, cfg);
        case Method::GeexInterpolated: return geex_interpolated(m, x, cfg);
        case Method::GeexMerged: return geex_merged(m, x, cfg);
        case Method::Ig: {
            Attribution a = ig_reference(m, x, resolve_baseline(cfg, x), 512,
                                         cfg.class_idx, cfg.workers);
            a.seed = cfg.seed;
            return a;
        }
        case Method::SmoothGrad:
            return smoothgrad_reference(m, x, cfg.n_star, cfg.sigma, cfg.seed,
                                        cfg.class_idx, cfg.mirrored, cfg.workers);
        case Method::Random: return random_reference(x.shape, cfg.seed);
    }
    raise(ErrorKind::BadCount, "unknown method");
}

}  // namespace geex
