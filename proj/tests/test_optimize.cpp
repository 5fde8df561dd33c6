#include "lrnn/optimize.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <limits>

using namespace lrnn;
using namespace lrnn_test;

namespace {

// Brute-force oracle for 2-variable LPs with nonnegative variables: checks
// the origin, axis intersections and all row-pair intersections.
double two_var_oracle(const LinearProgram& lp) {
    const std::size_t rows = lp.d.rows();
    std::vector<std::pair<double, double>> candidates = {{0.0, 0.0}};
    auto add_axis = [&](std::size_t i) {
        if (lp.d(i, 0) != 0.0) candidates.push_back({lp.q[i] / lp.d(i, 0), 0.0});
        if (lp.d(i, 1) != 0.0) candidates.push_back({0.0, lp.q[i] / lp.d(i, 1)});
    };
    for (std::size_t i = 0; i < rows; ++i) {
        add_axis(i);
        for (std::size_t j = i + 1; j < rows; ++j) {
            const double det = lp.d(i, 0) * lp.d(j, 1) - lp.d(i, 1) * lp.d(j, 0);
            if (std::abs(det) < 1e-12) continue;
            const double x = (lp.q[i] * lp.d(j, 1) - lp.d(i, 1) * lp.q[j]) / det;
            const double y = (lp.d(i, 0) * lp.q[j] - lp.q[i] * lp.d(j, 0)) / det;
            candidates.push_back({x, y});
        }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : candidates) {
        if (x < -1e-9 || y < -1e-9) continue;
        bool ok = true;
        for (std::size_t i = 0; i < rows && ok; ++i)
            ok = lp.d(i, 0) * x + lp.d(i, 1) * y <= lp.q[i] + 1e-9;
        if (ok) best = std::min(best, lp.w[0] * x + lp.w[1] * y);
    }
    return best;
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("solve_lp trivial instances") {
    {
        LinearProgram lp;
        lp.w = {1.0};
        lp.d = Matrix{{-1.0}};
        lp.q = {-1.0};
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(sol.y[0] == doctest::Approx(1.0));
    }
    {
        LinearProgram lp;
        lp.w = {-1.0, -1.0};
        lp.d = Matrix{{1.0, 1.0}};
        lp.q = {1.0};
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(-1.0).epsilon(1e-9));
    }
}

TEST_CASE("solve_lp detects infeasible and unbounded programs") {
    {
        LinearProgram lp;  // y <= -1 with y >= 0
        lp.w = {1.0};
        lp.d = Matrix{{1.0}};
        lp.q = {-1.0};
        CHECK(solve_lp(lp).status == LpStatus::Infeasible);
    }
    {
        LinearProgram lp;  // min -y over free y, no effective constraint
        lp.w = {-1.0};
        lp.d = Matrix{{0.0}};
        lp.q = {1.0};
        lp.num_free = 1;
        CHECK(solve_lp(lp).status == LpStatus::Unbounded);
    }
}

TEST_CASE("solve_lp finishes the classic degenerate cycling instance") {
    // Beale's example; optimum -1/20 at (1/25, 0, 1, 0).
    LinearProgram lp;
    lp.w = {-0.75, 150.0, -0.02, 6.0};
    lp.d = Matrix{{0.25, -60.0, -1.0 / 25.0, 9.0},
                  {0.5, -90.0, -1.0 / 50.0, 3.0},
                  {0.0, 0.0, 1.0, 0.0}};
    lp.q = {0.0, 0.0, 1.0};
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-7));
}

TEST_CASE("solve_lp matches a vertex-enumeration oracle on random 2-var programs") {
    auto rng = make_rng(11);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        LinearProgram lp;
        lp.w = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
        const std::size_t rows = 2 + rng() % 4;
        lp.d = random_matrix(rng, rows, 2);
        lp.q.resize(rows);
        for (auto& v : lp.q) v = uniform(rng, 0.1, 2.0);  // origin feasible
        // A bounding row keeps every instance bounded.
        for (std::size_t j = 0; j < 2; ++j) lp.d(0, j) = 1.0;
        lp.q[0] = uniform(rng, 1.0, 3.0);

        const double expected = two_var_oracle(lp);
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(expected).epsilon(1e-6));
        ++solved;
    }
    CHECK(solved == 60);
}

TEST_CASE("solve_lp weak duality spot check") {
    auto rng = make_rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        LinearProgram lp;
        const std::size_t cols = 2 + rng() % 3, rows = 2 + rng() % 3;
        lp.w.resize(cols);
        for (auto& v : lp.w) v = uniform(rng, 0.0, 1.0);  // w >= 0
        lp.d = random_matrix(rng, rows, cols);
        lp.q.resize(rows);
        for (auto& v : lp.q) v = uniform(rng, 0.0, 1.0);  // origin feasible
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective >= -1e-9);
    }
}

TEST_CASE("solve_lp returned point satisfies the constraints") {
    auto rng = make_rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        LinearProgram lp;
        const std::size_t cols = 3, rows = 4;
        lp.w.resize(cols);
        for (auto& v : lp.w) v = uniform(rng, -1.0, 1.0);
        lp.d = random_matrix(rng, rows, cols);
        for (std::size_t j = 0; j < cols; ++j) lp.d(0, j) = 1.0;
        lp.q = {uniform(rng, 1.0, 2.0), uniform(rng, 0.1, 1.0), uniform(rng, 0.1, 1.0),
                uniform(rng, 0.1, 1.0)};
        const LpSolution sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) continue;
        for (std::size_t i = 0; i < rows; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < cols; ++j) row += lp.d(i, j) * sol.y[j];
            CHECK(row <= lp.q[i] + 1e-8);
        }
        for (std::size_t j = 0; j < cols; ++j) CHECK(sol.y[j] >= -1e-10);
    }
}

TEST_CASE("solve_bounded handles boxes, equalities and multipliers") {
    // min x1 + 2 x2 s.t. x1 + x2 = 1, x in [0, 0.8]^2 -> x = (0.8, 0.2).
    BoundedLp lp;
    lp.a = Matrix{{1.0, 1.0}};
    lp.b = {1.0};
    lp.c = {1.0, 2.0};
    lp.lo = {0.0, 0.0};
    lp.up = {0.8, 0.8};
    const BoundedSolution sol = solve_bounded(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(0.8));
    CHECK(sol.x[1] == doctest::Approx(0.2));
    CHECK(sol.objective == doctest::Approx(1.2));
    // x2 is basic and interior, so pi equals its cost coefficient.
    REQUIRE(sol.row_multipliers.size() == 1);
    CHECK(sol.row_multipliers[0] == doctest::Approx(2.0));
}

TEST_CASE("minimize_quadratic scalar and identity instances") {
    {
        // (z - 3)^2 in the half-quadratic convention: H = 2, f = -6, const = 9.
        const auto [z, value] = minimize_quadratic(Matrix{{2.0}}, {-6.0}, 9.0);
        CHECK(z[0] == doctest::Approx(3.0));
        CHECK(std::abs(value) <= 1e-12);
    }
    {
        const auto [z, value] = minimize_quadratic(Matrix::identity(3), {0, 0, 0}, 7.25);
        for (double v : z) CHECK(v == 0.0);
        CHECK(value == 7.25);
    }
}

TEST_CASE("minimize_quadratic is a local minimum under random perturbations") {
    auto rng = make_rng(14);
    const Matrix a = random_matrix(rng, 5, 5);
    const Matrix h = transpose(a) * a + Matrix::identity(5);
    std::vector<double> f(5);
    for (auto& v : f) v = uniform(rng, -2, 2);
    const auto [z, value] = minimize_quadratic(h, f, 0.3);

    auto eval = [&](const std::vector<double>& x) {
        double quad = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) quad += x[i] * h(i, j) * x[j];
            lin += f[i] * x[i];
        }
        return 0.5 * quad + lin + 0.3;
    };
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> delta(5);
        double norm = 0.0;
        for (auto& d : delta) {
            d = uniform(rng, -1, 1);
            norm += d * d;
        }
        norm = std::sqrt(norm);
        std::vector<double> x = z;
        for (std::size_t i = 0; i < 5; ++i) x[i] += 1e-2 * delta[i] / norm;
        CHECK(eval(x) >= value - 1e-12);
    }

    // Finite-difference gradient at the minimizer.
    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    for (std::size_t i = 0; i < 5; ++i) {
        std::vector<double> xp = z, xm = z;
        xp[i] += 1e-6;
        xm[i] -= 1e-6;
        CHECK(std::abs(eval(xp) - eval(xm)) / 2e-6 <= 1e-6 * (1.0 + fmax));
    }
}

}  // TEST_SUITE
