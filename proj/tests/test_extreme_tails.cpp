#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "otrisk/extreme_tails.hpp"
#include "otrisk/pipeline.hpp"
#include "otrisk/simulate.hpp"

using namespace otrisk;

namespace {

YSeries<double> pareto_series(Index n, double gamma, std::uint64_t seed) {
    Rng rng(seed);
    VectorX<double> y(n);
    for (Index i = 0; i < n; ++i) y(i) = std::pow(rng.uniform_pos(), -gamma);
    return make_y_series(std::move(y));
}

}  // namespace

TEST_CASE("y_values: identity coupling gives squared norms") {
    const auto grid = make_polar_grid_2d(20, 4);
    const auto fit = make_fit<double>(grid.points, grid.points, 8.0);
    const auto series = y_values(fit, false);
    for (Index i = 0; i < 20; ++i)
        CHECK(series.values(i) ==
              doctest::Approx(fit.grid_points.row(i).squaredNorm()).epsilon(1e-12));
    CHECK(std::is_sorted(series.sorted.data(), series.sorted.data() + series.n()));
}

TEST_CASE("y_values: smoothed and unsmoothed differ by the Cauchy-Schwarz bound") {
    FitOptions<double> options;
    options.m = 2;
    options.seed = 5;
    const auto fit = build_fit(sample_gaussian(200, 2, 6), options);
    const auto raw = y_values(fit, false);
    const auto smooth = y_values(fit, true);
    CHECK(smooth.smoothed);
    for (Index i = 0; i < fit.n(); ++i) {
        const VectorX<double> q = smoothed_quantile(fit, fit.grid_points.row(i).transpose());
        const double bound =
            fit.grid_points.row(i).norm() * (q - fit.observations.row(i).transpose()).norm();
        CHECK(std::abs(smooth.values(i) - raw.values(i)) <= bound + 1e-12);
    }
}

TEST_CASE("y_values: matched points track the elliptical radial law") {
    FitOptions<double> options;
    options.m = 1;
    options.seed = 77;
    const auto fit = build_fit(sample_gaussian(2000, 2, 78), options);
    const auto series = y_values(fit, false);
    const auto spec = EllipticalSpec<double>::gaussian(2);
    double total = 0;
    Index count = 0;
    for (Index i = 0; i < fit.n(); ++i) {
        const double r = fit.grid_points.row(i).norm();
        if (r < 0.2 || r > 0.8) continue;
        const double oracle = r * radial_quantile(spec, r);
        total += std::abs(series.values(i) - oracle);
        ++count;
    }
    CHECK(count > 500);
    CHECK(total / count < 0.25);
}

TEST_CASE("pareto qq data: exact ladder and ordering") {
    VectorX<double> y(4);
    y << 1.0, std::exp(1.0), std::exp(2.0), std::exp(3.0);
    const auto series = make_y_series(y);
    const auto qq = pareto_qq_data(series);
    REQUIRE(qq.log_order_statistic.size() == 4);
    CHECK(qq.dropped == 0);
    for (int i = 0; i < 4; ++i) {
        CHECK(qq.log_order_statistic[i] == doctest::Approx(static_cast<double>(i)).epsilon(1e-12));
        CHECK(qq.log_exponential_quantile[i] ==
              doctest::Approx(-std::log(1.0 - (i + 1) / 5.0)).epsilon(1e-12));
        if (i > 0)
            CHECK(qq.log_exponential_quantile[i] > qq.log_exponential_quantile[i - 1]);
    }
}

TEST_CASE("pareto qq data: drops nonpositive values and needs two points") {
    VectorX<double> y(5);
    y << -1.0, 0.0, 2.0, 3.0, 4.0;
    const auto qq = pareto_qq_data(make_y_series(y));
    CHECK(qq.dropped == 2);
    CHECK(qq.log_order_statistic.size() == 3);

    VectorX<double> bad(3);
    bad << -1.0, -2.0, 1.0;
    CHECK_THROWS_AS(pareto_qq_data(make_y_series(bad)), InsufficientData);
}

TEST_CASE("pareto qq data: slope of the upper tail estimates gamma") {
    const auto series = pareto_series(5000, 0.5, 9);
    const auto qq = pareto_qq_data(series);
    const auto n = static_cast<Index>(qq.log_order_statistic.size());
    const Index k = 200;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (Index i = n - k; i < n; ++i) {
        sx += qq.log_exponential_quantile[i];
        sy += qq.log_order_statistic[i];
        sxx += qq.log_exponential_quantile[i] * qq.log_exponential_quantile[i];
        sxy += qq.log_exponential_quantile[i] * qq.log_order_statistic[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    CHECK(slope == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("hill estimator: exact arithmetic cases") {
    VectorX<double> y(4);
    y << 1.0, std::exp(1.0), std::exp(2.0), std::exp(3.0);
    const auto series = make_y_series(y);
    CHECK(hill_estimate(series, 3) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hill_estimate(series, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(hill_estimate(series, 0), InvalidArgument);
    CHECK_THROWS_AS(hill_estimate(series, 4), InvalidArgument);

    VectorX<double> with_negative(4);
    with_negative << -2.0, 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(hill_estimate(make_y_series(with_negative), 3), InvalidArgument);
}

TEST_CASE("hill estimator: pareto median over seeds") {
    std::vector<double> hills;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        hills.push_back(hill_estimate(pareto_series(1000, 1.0 / 3.0, 100 + seed), 100));
    std::nth_element(hills.begin(), hills.begin() + 25, hills.end());
    const double median = hills[25];
    CHECK(median > 0.28);
    CHECK(median < 0.39);
}

TEST_CASE("hill estimator: scale invariance") {
    const auto base = pareto_series(500, 0.4, 3);
    VectorX<double> scaled_values = 17.5 * base.values;
    const auto scaled = make_y_series(std::move(scaled_values));
    for (const Index k : {10, 50, 200})
        CHECK(hill_estimate(scaled, k) == doctest::Approx(hill_estimate(base, k)).epsilon(1e-12));
}

TEST_CASE("ridge estimator: limits and the regression oracle") {
    const auto series = pareto_series(1000, 0.5, 21);

    // Huge ridge penalty kills the correction.
    for (const Index k : {20, 100, 400})
        CHECK(std::abs(ridge_estimate(series, k, 1e12) - hill_estimate(series, k)) < 1e-6);

    // tau = 0 is the plain regression intercept.
    for (const Index k : {20, 100, 400}) {
        const double oracle = oracles::regression_evi_oracle(series.sorted, k, -1.0);
        CHECK(ridge_estimate(series, k, 0.0) == doctest::Approx(oracle).epsilon(1e-10));
        CHECK(least_squares_estimate(series, k) == ridge_estimate(series, k, 0.0));
    }

    CHECK_THROWS_AS(ridge_estimate(series, 1, 0.0), InvalidArgument);
    CHECK_THROWS_AS(ridge_estimate(series, 10, -1.0), InvalidArgument);
    CHECK_THROWS_AS(ridge_estimate(series, 10, 0.0, 0.5), InvalidArgument);
}

TEST_CASE("evi curves: shapes, finiteness, tau = 0 equals ls") {
    VectorX<double> values = pareto_series(400, 0.3, 8).values;
    values(0) = -0.5;  // one nonpositive entry to exercise the drop path
    const auto series = make_y_series(std::move(values));
    const auto curves = evi_curves(series, 200, 0.5);
    CHECK(curves.dropped == 1);
    REQUIRE(curves.ks.size() == 199);
    for (std::size_t i = 0; i < curves.ks.size(); ++i) {
        CHECK(std::isfinite(curves.hill[i]));
        CHECK(std::isfinite(curves.ls[i]));
        CHECK(std::isfinite(curves.ridge[i]));
    }
    const auto ls_curves = evi_curves(series, 200, 0.0);
    for (std::size_t i = 0; i < ls_curves.ks.size(); ++i)
        CHECK(ls_curves.ridge[i] == ls_curves.ls[i]);
}

TEST_CASE("ecdf distance: exact endpoints") {
    VectorX<double> a(4);
    a << 1.0, 2.0, 3.0, 4.0;
    const auto series = make_y_series(a);
    CHECK(ecdf_distance(series, a) == 0.0);

    VectorX<double> far(3);
    far << 10.0, 11.0, 12.0;
    CHECK(ecdf_distance(series, far) == 1.0);
}
