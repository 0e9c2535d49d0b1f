#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geex/errors.hpp"
#include "geex/grid.hpp"
#include "geex/rng.hpp"

namespace geex {

// Isotropic Gaussian location family: one sigma for every coordinate.
struct SearchDistribution {
    double sigma = 1.0;
    Shape dim_shape;

    SearchDistribution(double sigma_, Shape shape) : sigma(sigma_), dim_shape(std::move(shape)) {
        if (!(sigma > 0.0)) raise(ErrorKind::BadCount, "sigma must be positive");
    }
};

enum class AlphaMode { IidUniform, Stratified };

// Pre-generated noise masks with their score vectors and path positions.
// Built once, reusable across explicands.
struct MaskSet {
    std::vector<Grid> masks;
    std::vector<Grid> scores;
    std::vector<double> alphas;
    double sigma = 1.0;
    std::uint64_t seed = 0;
    bool mirrored = false;
    std::optional<Kernel> smoothing;
    AlphaMode alpha_mode = AlphaMode::Stratified;

    std::size_t size() const { return masks.size(); }
};

// Score of the isotropic Gaussian location family at offset eps: eps / sigma^2.
inline Grid score_gradient(const SearchDistribution& dist, const Grid& eps) {
    if (eps.shape != dist.dim_shape)
        raise(ErrorKind::ShapeMismatch, "score_gradient: mask shape " +
                                            shape_to_string(eps.shape) +
                                            " vs distribution shape " +
                                            shape_to_string(dist.dim_shape));
    return scale(eps, 1.0 / (dist.sigma * dist.sigma));
}

namespace detail {

// Stream ids for the independent draw families under one seed.
constexpr std::uint64_t kMaskStreamBase = 0;
constexpr std::uint64_t kAlphaStreamTag = 0x414c504841ULL;  // "ALPHA"

inline Grid draw_raw_mask(const SearchDistribution& dist, std::uint64_t seed,
                          std::uint64_t index) {
    CounterRng rng(seed, kMaskStreamBase + index);
    Grid eps(dist.dim_shape);
    for (double& v : eps.data) v = dist.sigma * rng.normal();
    return eps;
}

}  // namespace detail

// Deterministic function of all arguments; the i-th mask depends only on
// (seed, i), so generation order is irrelevant. Mirror pairs share one alpha
// and smoothing is applied before mirroring (the smoothed negation equals the
// negated smoothed mask exactly, by linearity of the convolution).
inline MaskSet generate_mask_set(const SearchDistribution& dist, int n_star,
                                 std::uint64_t seed, bool mirrored,
                                 std::optional<Kernel> smoothing = std::nullopt,
                                 AlphaMode alpha_mode = AlphaMode::Stratified) {
    if (n_star < 2) raise(ErrorKind::BadBudget, "n_star must be >= 2");
    if (mirrored && n_star % 2 != 0)
        raise(ErrorKind::OddWithMirror, "mirrored sampling requires even n_star");
    if (smoothing && dist.dim_shape.size() != 2)
        raise(ErrorKind::NotTwoDimensional, "mask smoothing requires a 2-D shape");

    MaskSet out;
    out.sigma = dist.sigma;
    out.seed = seed;
    out.mirrored = mirrored;
    out.smoothing = smoothing;
    out.alpha_mode = alpha_mode;
    out.masks.reserve(n_star);
    out.scores.reserve(n_star);
    out.alphas.reserve(n_star);

    const int pair_span = mirrored ? 2 : 1;
    const int n_distinct = n_star / pair_span;

    for (int k = 0; k < n_distinct; ++k) {
        Grid eps = detail::draw_raw_mask(dist, seed, static_cast<std::uint64_t>(k));
        if (smoothing) eps = convolve_same(eps, *smoothing);

        CounterRng arng(seed, detail::kAlphaStreamTag ^ static_cast<std::uint64_t>(k));
        const double u = arng.uniform();
        const double alpha = alpha_mode == AlphaMode::Stratified
                                 ? (static_cast<double>(k) + u) / n_distinct
                                 : u;

        out.masks.push_back(eps);
        out.scores.push_back(score_gradient(dist, eps));
        out.alphas.push_back(alpha);
        if (mirrored) {
            out.masks.push_back(scale(eps, -1.0));
            out.scores.push_back(scale(out.scores.back(), -1.0));
            out.alphas.push_back(alpha);
        }
    }
    return out;
}

struct MaskStats {
    Grid mean;
    Grid stddev;
};

inline MaskStats sample_count_stats(const MaskSet& ms) {
    if (ms.masks.empty()) raise(ErrorKind::BadCount, "empty mask set");
    const std::size_t n = ms.masks.size();
    Grid mean(ms.masks[0].shape);
    for (const Grid& m : ms.masks) mean = add(mean, m);
    mean = scale(mean, 1.0 / static_cast<double>(n));

    Grid var(mean.shape);
    for (const Grid& m : ms.masks) {
        Grid d = sub(m, mean);
        var = add(var, mul(d, d));
    }
    var = scale(var, 1.0 / static_cast<double>(n));
    for (double& v : var.data) v = std::sqrt(v);
    return {mean, var};
}

}  // namespace geex
