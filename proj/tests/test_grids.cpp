#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "otrisk/grids.hpp"

using namespace otrisk;

namespace {

std::vector<double> sorted_norms(const Grid<double>& grid) {
    std::vector<double> norms;
    norms.reserve(static_cast<std::size_t>(grid.n()));
    for (Index i = 0; i < grid.n(); ++i) norms.push_back(grid.points.row(i).norm());
    std::sort(norms.begin(), norms.end());
    return norms;
}

}  // namespace

TEST_CASE("polar grid: single point has norm 1/2") {
    const auto grid = make_polar_grid_2d(1, 99);
    REQUIRE(grid.n() == 1);
    CHECK(grid.points.row(0).norm() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("polar grid: norm multiset is exactly {i/(n+1)}") {
    const Index n = 1000;
    const auto norms = sorted_norms(make_polar_grid_2d(n, 7));
    for (Index i = 0; i < n; ++i) {
        const double expected = static_cast<double>(i + 1) / static_cast<double>(n + 1);
        CHECK(norms[static_cast<std::size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(norms.back() < 1.0);
}

TEST_CASE("polar grid: determinism and seed sensitivity") {
    const auto a = make_polar_grid_2d(4, 31);
    const auto b = make_polar_grid_2d(4, 31);
    const auto c = make_polar_grid_2d(4, 32);
    CHECK(a.points == b.points);
    CHECK(a.points != c.points);
    CHECK_THROWS_AS(make_polar_grid_2d(0, 1), InvalidArgument);
}

TEST_CASE("radial rank grid: norms are rank/(n+1)") {
    const auto grid = make_radial_rank_grid(3, 3, 5);
    const auto norms = sorted_norms(grid);
    CHECK(norms[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(norms[1] == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(norms[2] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK_THROWS_AS(make_radial_rank_grid(3, 1, 5), InvalidArgument);
}

TEST_CASE("radial rank grid: max norm stays in the open ball") {
    for (const Index n : {1, 10, 257}) {
        const auto grid = make_radial_rank_grid(n, 4, 11);
        CHECK(sorted_norms(grid).back() ==
              doctest::Approx(static_cast<double>(n) / (n + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("radial rank grid: directions are empirically uniform") {
    // 99th-percentile bound on the mean direction over 50 seeds.
    const Index n = 1000;
    int bad = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto grid = make_radial_rank_grid(n, 3, seed);
        Eigen::RowVector3d mean = Eigen::RowVector3d::Zero();
        for (Index i = 0; i < n; ++i) mean += grid.points.row(i).normalized();
        if ((mean / static_cast<double>(n)).norm() >= 0.1) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("factorized grid: layout and norm counts") {
    const auto grid = make_factorized_grid(2, 3, 1, 2, 17);
    REQUIRE(grid.n() == 7);
    int origins = 0, inner = 0, outer = 0;
    for (Index i = 0; i < grid.n(); ++i) {
        const double r = grid.points.row(i).norm();
        if (r == 0.0)
            ++origins;
        else if (std::abs(r - 1.0 / 3.0) < 1e-12)
            ++inner;
        else if (std::abs(r - 2.0 / 3.0) < 1e-12)
            ++outer;
    }
    CHECK(origins == 1);
    CHECK(inner == 3);
    CHECK(outer == 3);
}

TEST_CASE("factorized grid: trivial case and bad n0") {
    const auto grid = make_factorized_grid(1, 1, 0, 3, 2);
    REQUIRE(grid.n() == 1);
    CHECK(grid.points.row(0).norm() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(make_factorized_grid(2, 3, 2, 2, 1), InvalidArgument);
    CHECK_THROWS_AS(make_factorized_grid(2, 3, -1, 2, 1), InvalidArgument);
}

TEST_CASE("direction uniformity across seeds for every kind") {
    // |mean unit direction| < 3/sqrt(n) in at least 95 of 100 seeds.
    const Index n = 500;
    const double bound = 3.0 / std::sqrt(static_cast<double>(n));
    int ok_polar = 0, ok_rank = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        {
            const auto grid = make_polar_grid_2d(n, seed);
            Eigen::RowVector2d mean = Eigen::RowVector2d::Zero();
            for (Index i = 0; i < n; ++i) mean += grid.points.row(i).normalized();
            if ((mean / static_cast<double>(n)).norm() < bound) ++ok_polar;
        }
        {
            const auto grid = make_radial_rank_grid(n, 3, seed);
            Eigen::RowVector3d mean = Eigen::RowVector3d::Zero();
            for (Index i = 0; i < n; ++i) mean += grid.points.row(i).normalized();
            if ((mean / static_cast<double>(n)).norm() < bound) ++ok_rank;
        }
    }
    CHECK(ok_polar >= 95);
    CHECK(ok_rank >= 95);
}

TEST_CASE("factorized grid approximates the spherical uniform in W2") {
    // Oracle: assignment-based Wasserstein-2 distance to a fresh draw from
    // the spherical uniform itself.
    const auto grid = make_factorized_grid(10, 100, 0, 2, 3);
    REQUIRE(grid.n() == 1000);
    Rng rng(999);
    MatrixX<double> reference(1000, 2);
    for (Index i = 0; i < 1000; ++i) {
        double a = 2.0 * M_PI * rng.uniform();
        reference.row(i) << std::cos(a), std::sin(a);
        reference.row(i) *= rng.uniform();
    }
    CHECK(oracles::wasserstein2(grid.points, reference) < 0.1);
}
