#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "geex/errors.hpp"

namespace geex {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_to_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Shaped dense real array, row-major. The universal carrier for explicands,
// baselines, noise masks, and attribution maps. All operations return fresh
// Grids; a constructed Grid is never mutated through the public surface.
struct Grid {
    Shape shape;
    std::vector<double> data;

    Grid() = default;

    Grid(Shape s, double fill = 0.0)
        : shape(std::move(s)), data(shape_numel(shape), fill) {}

    Grid(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_numel(shape))
            raise(ErrorKind::ShapeMismatch,
                  "data length " + std::to_string(data.size()) +
                      " does not match shape " + shape_to_string(shape));
    }

    std::size_t size() const { return data.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // 2-D access, row-major
    double at2(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
    double& at2(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }

    bool same_shape(const Grid& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require_same_shape(const Grid& a, const Grid& b, const char* op) {
    if (!a.same_shape(b))
        raise(ErrorKind::ShapeMismatch, std::string(op) + ": shapes " +
                                            shape_to_string(a.shape) + " vs " +
                                            shape_to_string(b.shape));
}

inline Grid add(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "add");
    Grid out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

inline Grid sub(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "sub");
    Grid out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

// Hadamard product
inline Grid mul(const Grid& a, const Grid& b) {
    require_same_shape(a, b, "mul");
    Grid out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

inline Grid scale(const Grid& a, double s) {
    Grid out = a;
    for (double& v : out.data) v *= s;
    return out;
}

// x(alpha) = baseline + alpha * (explicand - baseline); alpha=0 is the
// baseline, alpha=1 the explicand.
inline Grid interpolate(const Grid& baseline, const Grid& explicand, double alpha) {
    require_same_shape(baseline, explicand, "interpolate");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        raise(ErrorKind::AlphaOutOfRange, "alpha=" + std::to_string(alpha));
    if (alpha == 0.0) return baseline;
    if (alpha == 1.0) return explicand;
    Grid out = baseline;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += alpha * (explicand[i] - baseline[i]);
    return out;
}

inline double frobenius_norm(const Grid& g) {
    double acc = 0.0;
    for (double v : g.data) acc += v * v;
    return std::sqrt(acc);
}

// 2-D Gaussian sampled on an odd square, then rescaled to unit Frobenius
// norm so convolving a mask leaves its amplitude unchanged.
struct Kernel {
    int size = 0;
    double sigma = 0.0;
    Grid weights;
};

namespace detail {

inline Grid raw_gaussian_weights(int size, double sigma) {
    if (size <= 0 || size % 2 == 0)
        raise(ErrorKind::EvenKernel, "kernel size must be odd and positive, got " +
                                         std::to_string(size));
    if (!(sigma > 0.0))
        raise(ErrorKind::BadCount, "kernel sigma must be positive");
    const int half = size / 2;
    Grid w({static_cast<std::size_t>(size), static_cast<std::size_t>(size)});
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c) {
            const double dr = r - half, dc = c - half;
            w.at2(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        }
    return w;
}

}  // namespace detail

inline Kernel make_gaussian_kernel(int size, double sigma) {
    Kernel k;
    k.size = size;
    k.sigma = sigma;
    k.weights = detail::raw_gaussian_weights(size, sigma);
    const double norm = frobenius_norm(k.weights);
    for (double& v : k.weights.data) v /= norm;
    return k;
}

// Same-shape 2-D convolution with zero padding at the borders.
inline Grid convolve_same(const Grid& image, const Kernel& kernel) {
    if (image.shape.size() != 2)
        raise(ErrorKind::NotTwoDimensional,
              "convolve_same requires a 2-D grid, got shape " +
                  shape_to_string(image.shape));
    const int rows = static_cast<int>(image.shape[0]);
    const int cols = static_cast<int>(image.shape[1]);
    const int half = kernel.size / 2;
    Grid out(image.shape);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int kr = -half; kr <= half; ++kr)
                for (int kc = -half; kc <= half; ++kc) {
                    const int ir = r + kr, ic = c + kc;
                    if (ir < 0 || ir >= rows || ic < 0 || ic >= cols) continue;
                    acc += image.at2(ir, ic) * kernel.weights.at2(kr + half, kc + half);
                }
            out.at2(r, c) = acc;
        }
    return out;
}

// Blur with a sum-normalized Gaussian (weights sum to 1), the usual blur
// semantics used for the blurred-explicand baseline. Mask smoothing uses the
// Frobenius-normalized Kernel instead.
inline Grid gaussian_blur(const Grid& image, int size, double sigma) {
    if (image.shape.size() != 2)
        raise(ErrorKind::NotTwoDimensional, "gaussian_blur requires a 2-D grid");
    Grid w = detail::raw_gaussian_weights(size, sigma);
    const double total = std::accumulate(w.data.begin(), w.data.end(), 0.0);
    Kernel k;
    k.size = size;
    k.sigma = sigma;
    k.weights = scale(w, 1.0 / total);
    return convolve_same(image, k);
}

}  // namespace geex
