#include "lrnn/stats.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>

using namespace lrnn;
using namespace lrnn_test;

TEST_SUITE("stats") {

TEST_CASE("nmrse endpoints") {
    const std::vector<double> target = {1.0, -0.5, 0.25, 0.75, -1.0};
    CHECK(nmrse(target, target) == 0.0);

    double mean = 0.0;
    for (double v : target) mean += v / target.size();
    const std::vector<double> constant(target.size(), mean);
    CHECK(nmrse(constant, target) == doctest::Approx(1.0));

    const std::vector<double> exactly_constant(5, 2.0);
    CHECK_THROWS_AS(nmrse(exactly_constant, exactly_constant), std::invalid_argument);
    CHECK_THROWS_AS(nmrse(target, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("nmrse is invariant under a common affine map") {
    auto rng = make_rng(51);
    std::vector<double> target(50), pred(50);
    for (std::size_t i = 0; i < 50; ++i) {
        target[i] = uniform(rng, -1, 1);
        pred[i] = target[i] + uniform(rng, -0.2, 0.2);
    }
    const double base = nmrse(pred, target);
    for (double a : {2.0, -0.5}) {
        for (double b : {0.0, 3.0}) {
            std::vector<double> t2(50), p2(50);
            for (std::size_t i = 0; i < 50; ++i) {
                t2[i] = a * target[i] + b;
                p2[i] = a * pred[i] + b;
            }
            CHECK(nmrse(p2, t2) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("eps error time average") {
    const std::vector<double> target = {0.0, 0.0, 0.0};
    const std::vector<double> inside = {0.01, -0.03, 0.05};
    const std::vector<double> outside = {0.15, 0.0, 0.0};
    CHECK(eps_error_timeavg(inside, target, 0.05, 1.0) == 0.0);
    CHECK(eps_error_timeavg(outside, target, 0.05, 1.0) == doctest::Approx(0.10));
    CHECK(eps_error_timeavg(outside, target, 0.05, 0.5) == doctest::Approx(0.05));
}

TEST_CASE("zero crossing distances") {
    {
        std::vector<double> alternating;
        for (int i = 0; i < 10; ++i) alternating.push_back(i % 2 ? -1.0 : 1.0);
        const auto d = zero_crossing_distances(alternating);
        REQUIRE(d.size() == 8);
        for (int v : d) CHECK(v == 1);
    }
    {
        const std::vector<double> positive = {0.3, 0.7, 1.0, 0.2};
        CHECK(zero_crossing_distances(positive).empty());
    }
    {
        std::vector<double> sine;
        for (int k = 0; k < 100; ++k) sine.push_back(std::sin(2.0 * M_PI * k / 20.0));
        const auto d = zero_crossing_distances(sine);
        REQUIRE(!d.empty());
        for (int v : d) CHECK(v == 10);
    }
    {
        // Total gap length never exceeds the series length.
        auto rng = make_rng(52);
        std::vector<double> noise(300);
        for (auto& v : noise) v = uniform(rng, -1, 1);
        const auto d = zero_crossing_distances(noise);
        long total = 0;
        for (int v : d) {
            CHECK(v >= 1);
            total += v;
        }
        CHECK(total <= static_cast<long>(noise.size()));
    }
}

TEST_CASE("kurtosis analytic and Monte Carlo values") {
    std::vector<double> pm;
    for (int i = 0; i < 100; ++i) pm.push_back(i % 2 ? 1.0 : -1.0);
    CHECK(kurtosis(pm) == doctest::Approx(-2.0));

    // Box-Muller standard normals; excess kurtosis concentrates near 0.
    auto rng = make_rng(53);
    std::vector<double> normal;
    normal.reserve(100000);
    while (normal.size() < 100000) {
        const double u1 = uniform(rng, 1e-12, 1.0), u2 = uniform(rng, 0.0, 1.0);
        const double r = std::sqrt(-2.0 * std::log(u1));
        normal.push_back(r * std::cos(2.0 * M_PI * u2));
        normal.push_back(r * std::sin(2.0 * M_PI * u2));
    }
    CHECK(std::abs(kurtosis(normal)) <= 0.1);

    // Affine invariance.
    std::vector<double> mapped(normal.begin(), normal.begin() + 1000);
    const double base = kurtosis(mapped);
    for (auto& v : mapped) v = -3.0 * v + 7.0;
    CHECK(kurtosis(mapped) == doctest::Approx(base).epsilon(1e-9));

    CHECK_THROWS_AS(kurtosis(std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(kurtosis(std::vector<double>(10, 5.0)), std::invalid_argument);
}

TEST_CASE("log-log slope recovers a constructed power law") {
    // Counts 2^(K-k) at d = 2^k give density exactly proportional to
    // center^{-2} under factor-2 binning.
    std::vector<int> distances;
    for (int k = 0; k <= 6; ++k) {
        const int count = 1 << (6 - k);
        for (int i = 0; i < count; ++i) distances.push_back(1 << k);
    }
    const LogLogFit fit = loglog_slope(distances);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(loglog_slope(std::vector<int>(50, 7)), std::invalid_argument);
}

TEST_CASE("sparsity fraction") {
    CHECK(sparsity_fraction(Matrix(4, 4), 1e-9) == 1.0);
    CHECK(sparsity_fraction(Matrix::ones(3, 3), 0.5) == 0.0);
    const Matrix half{{0.0, 1.0}, {1.0, 0.0}};
    CHECK(sparsity_fraction(half, 0.5) == 0.5);
    CHECK_THROWS_AS(sparsity_fraction(half, -1.0), std::invalid_argument);
}

TEST_CASE("zero crossing stats bundle") {
    std::vector<double> square;  // exact +-1 blocks: every gap is exactly 10
    for (int k = 0; k < 2000; ++k) square.push_back((k / 10) % 2 ? -1.0 : 1.0);
    const ZeroCrossingStats s = zero_crossing_stats(square);
    CHECK(!s.distances.empty());
    CHECK(!s.kurtosis.has_value());      // zero variance
    CHECK(!s.loglog_slope.has_value());  // single occupied bin
}

}  // TEST_SUITE
