#include <doctest.h>

#include <cmath>

#include "geex/grid.hpp"
#include "geex/rng.hpp"

using namespace geex;

namespace {

Grid vec(std::vector<double> v) {
    Shape s{v.size()};
    return Grid(s, std::move(v));
}

Grid random_grid(const Shape& shape, std::uint64_t seed) {
    Grid g(shape);
    CounterRng rng(seed, 0);
    for (double& v : g.data) v = rng.normal();
    return g;
}

}  // namespace

TEST_CASE("elementwise basics") {
    CHECK(mul(vec({1, 2, 3}), vec({4, 5, 6})).data == std::vector<double>{4, 10, 18});
    CHECK(scale(vec({1, 2}), 0).data == std::vector<double>{0, 0});
    Grid x = vec({1.5, -2.25, 3});
    CHECK(sub(x, x).data == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(add(vec({1}), vec({1, 2})), Error);
}

TEST_CASE("add/sub round trip within 1e-12") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Grid a = random_grid({7}, seed);
        Grid b = random_grid({7}, seed + 100);
        Grid back = sub(add(a, b), b);
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(std::fabs(back[i] - a[i]) <= 1e-12);
    }
}

TEST_CASE("interpolate endpoints and midpoint") {
    Grid zero({2});
    Grid x = vec({2, 4});
    CHECK(interpolate(zero, x, 1.0).data == x.data);
    Grid base = vec({-1, 3});
    CHECK(interpolate(base, x, 0.0).data == base.data);
    CHECK(interpolate(zero, x, 0.5).data == std::vector<double>{1, 2});
    CHECK_THROWS_AS(interpolate(zero, x, 1.5), Error);
    CHECK_THROWS_AS(interpolate(zero, x, -0.1), Error);
    CHECK_THROWS_AS(interpolate(zero, vec({1, 2, 3}), 0.5), Error);
}

TEST_CASE("interpolate is affine") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Grid base = random_grid({5}, seed);
        Grid x = random_grid({5}, seed + 50);
        CounterRng rng(seed, 7);
        const double alpha = rng.uniform();
        Grid lhs = interpolate(base, x, alpha);
        Grid rhs = add(scale(base, 1.0 - alpha), scale(x, alpha));
        for (std::size_t i = 0; i < lhs.size(); ++i)
            CHECK(std::fabs(lhs[i] - rhs[i]) <= 1e-12);
    }
}

TEST_CASE("frobenius norm") {
    CHECK(frobenius_norm(vec({3, 4})) == doctest::Approx(5.0));
    CHECK(frobenius_norm(Grid({3, 3})) == 0.0);
}

TEST_CASE("gaussian kernel has unit Frobenius norm for all sizes") {
    for (int size : {3, 5, 7, 9})
        for (double sigma : {0.3, 0.7, 1.0, 2.5}) {
            Kernel k = make_gaussian_kernel(size, sigma);
            CHECK(frobenius_norm(k.weights) == doctest::Approx(1.0).epsilon(1e-12));
        }
    CHECK_THROWS_AS(make_gaussian_kernel(4, 1.0), Error);
}

TEST_CASE("convolution impulse response recovers kernel") {
    Grid img({9, 9});
    img.at2(4, 4) = 1.0;
    Kernel k = make_gaussian_kernel(3, 0.7);
    Grid out = convolve_same(img, k);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(out.at2(3 + r, 3 + c) ==
                  doctest::Approx(k.weights.at2(r, c)).epsilon(1e-12));
    CHECK(convolve_same(Grid({5, 5}), k).data == std::vector<double>(25, 0.0));
    CHECK_THROWS_AS(convolve_same(Grid({4}), k), Error);
}

TEST_CASE("convolution of constant image: direct 25-tap oracle at interior") {
    const double c = 1.7;
    Grid img({8, 8}, c);
    Kernel k = make_gaussian_kernel(5, 1.1);
    Grid out = convolve_same(img, k);
    // oracle: direct summation over the taps
    double expected = 0.0;
    for (double w : k.weights.data) expected += c * w;
    for (std::size_t r = 2; r < 6; ++r)
        for (std::size_t col = 2; col < 6; ++col)
            CHECK(out.at2(r, col) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("convolution is linear") {
    Grid a = random_grid({8, 8}, 1);
    Grid b = random_grid({8, 8}, 2);
    Kernel k = make_gaussian_kernel(5, 0.7);
    Grid lhs = convolve_same(add(a, b), k);
    Grid rhs = add(convolve_same(a, k), convolve_same(b, k));
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::fabs(lhs[i] - rhs[i]) <= 1e-10);
}

TEST_CASE("gaussian blur keeps interior of constant image") {
    Grid img({8, 8}, 0.6);
    Grid out = gaussian_blur(img, 3, 0.7);
    for (std::size_t r = 1; r < 7; ++r)
        for (std::size_t c = 1; c < 7; ++c)
            CHECK(out.at2(r, c) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(gaussian_blur(Grid({6, 6}), 3, 0.7).data == std::vector<double>(36, 0.0));
    CHECK_THROWS_AS(gaussian_blur(img, 4, 0.7), Error);
}

TEST_CASE("gaussian blur impulse: hand-evaluated 3x3 stamp") {
    Grid img({7, 7});
    img.at2(3, 3) = 1.0;
    Grid out = gaussian_blur(img, 3, 0.7);
    // oracle: w(i,j) = exp(-(i^2+j^2)/(2*0.49)), sum-normalized
    double w[3][3];
    double total = 0.0;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
            w[i + 1][j + 1] = std::exp(-(i * i + j * j) / (2.0 * 0.49));
            total += w[i + 1][j + 1];
        }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(out.at2(2 + i, 2 + j) ==
                  doctest::Approx(w[i][j] / total).epsilon(1e-12));
}
