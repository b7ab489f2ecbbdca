#include <doctest.h>

#include <cmath>

#include "otrisk/pipeline.hpp"
#include "otrisk/simulate.hpp"
#include "otrisk/smooth_quantile.hpp"
#include "otrisk/volumes.hpp"

using namespace otrisk;

namespace {

const auto gaussian_qr_2d = [](double p) { return std::sqrt(-2.0 * std::log1p(-p)); };

CenterOutwardFit<double> gaussian_fit(Index n, Index d, std::uint64_t seed, Index m = 3) {
    FitOptions<double> options;
    options.m = m;
    options.seed = seed;
    return build_fit(sample_gaussian(n, d, seed + 1), options);
}

}  // namespace

TEST_CASE("sphere rule integrates low-order moments exactly") {
    QuadratureSpec spec;
    for (const Index d : {2, 3}) {
        const auto [dirs, weights] = detail::sphere_rule<double>(d, spec);
        const double area = weights.sum();
        const double expected_area = d * unit_ball_volume(static_cast<int>(d));
        CHECK(area == doctest::Approx(expected_area).epsilon(1e-12));
        CHECK((dirs.transpose() * weights).norm() < 1e-10);
        const MatrixX<double> second = dirs.transpose() * weights.asDiagonal() * dirs;
        CHECK((second - (area / d) * MatrixX<double>::Identity(d, d)).norm() < 1e-10);
    }
}

TEST_CASE("closed-form elliptical volume") {
    // Gaussian d = 2, |Sigma| = 1, p = 0.5: pi * 2 log 2.
    CHECK(elliptical_volume<double>(0.5, 2, 1.0, gaussian_qr_2d) ==
          doctest::Approx(M_PI * 2.0 * std::log(2.0)).epsilon(1e-12));

    // Q_R(p) -> 0 drives the volume to zero.
    CHECK(elliptical_volume<double>(1e-12, 2, 1.0, gaussian_qr_2d) ==
          doctest::Approx(0.0).epsilon(1e-9));

    // Scaling sigma by c multiplies the volume by c^{d/2}.
    const double c = 2.7;
    for (const Index d : {2, 3, 5}) {
        const auto qr = [d](double p) {
            return std::sqrt(chi_square_quantile(p, static_cast<double>(d)));
        };
        const double base = elliptical_volume<double>(0.4, d, 1.0, qr);
        const double scaled = elliptical_volume<double>(0.4, d, std::pow(c, d), qr);
        CHECK(scaled == doctest::Approx(std::pow(c, d / 2.0) * base).epsilon(1e-12));
    }

    CHECK_THROWS_AS(elliptical_volume<double>(0.0, 2, 1.0, gaussian_qr_2d), InvalidArgument);
    CHECK_THROWS_AS(elliptical_volume<double>(0.5, 2, -1.0, gaussian_qr_2d), InvalidArgument);
}

TEST_CASE("empirical volume: singular fit integrates to zero") {
    MatrixX<double> U(1, 2), X(1, 2);
    U << 0.1, 0.2;
    X << 5.0, -3.0;
    const auto fit = make_fit<double>(U, X, 2.0);
    const auto result = empirical_volume(fit, 0.5);
    CHECK(result.volume == 0.0);
}

TEST_CASE("empirical volume: gaussian d = 2 approaches the closed form") {
    const auto fit = gaussian_fit(1000, 2, 5);
    const auto result = empirical_volume(fit, 0.5);
    const double target = M_PI * 2.0 * std::log(2.0);
    CHECK(std::abs(result.volume - target) / target < 0.25);

    // Doubling the angular resolution barely moves the estimate.
    QuadratureSpec fine;
    fine.angular_nodes = 512;
    const auto refined = empirical_volume(fit, 0.5, fine);
    CHECK(std::abs(refined.volume - result.volume) / result.volume < 0.01);
}

TEST_CASE("empirical volume: monotone in the order") {
    const auto fit = gaussian_fit(300, 2, 7);
    const auto curve = empirical_volume_curve(fit, {0.3, 0.5, 0.7});
    CHECK(curve.volumes[0] <= curve.volumes[1] + 1e-6);
    CHECK(curve.volumes[1] <= curve.volumes[2] + 1e-6);
    CHECK(curve.method == VolumeMethod::Quadrature);
}

TEST_CASE("empirical volume agrees with the contour polygon area") {
    const auto fit = gaussian_fit(60, 2, 9, 5);
    const double quadrature = empirical_volume(fit, 0.5).volume;
    const auto polygon = quantile_contour(fit, 0.5, 4096);
    double shoelace = 0.0;
    for (Index i = 0; i < polygon.rows(); ++i) {
        const auto a = polygon.row(i);
        const auto b = polygon.row((i + 1) % polygon.rows());
        shoelace += a(0) * b(1) - b(0) * a(1);
    }
    shoelace = std::abs(shoelace) / 2.0;
    CHECK(quadrature == doctest::Approx(shoelace).epsilon(0.02));
}

TEST_CASE("empirical volume: gaussian d = 3") {
    const auto fit = gaussian_fit(400, 3, 3, 2);
    QuadratureSpec spec;
    spec.polar_nodes = 24;
    spec.azimuth_nodes = 48;
    const auto result = empirical_volume(fit, 0.5, spec);
    const double target = elliptical_volume<double>(0.5, 3, 1.0, [](double p) {
        return std::sqrt(chi_square_quantile(p, 3.0));
    });
    CHECK(std::abs(result.volume - target) / target < 0.4);
}

TEST_CASE("monte carlo volume agrees with quadrature on the same fit") {
    const auto fit = gaussian_fit(300, 3, 13, 2);
    QuadratureSpec spec;
    spec.mc_points = 40000;
    spec.mc_seed = 4;
    const auto quadrature = empirical_volume(fit, 0.5, spec);
    const auto mc = detail::monte_carlo_volume(fit, 0.5, spec);
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.volume - quadrature.volume) <
          std::max(5.0 * mc.std_error, 0.02 * quadrature.volume));
}

TEST_CASE("empirical volume: monte carlo for d = 4 carries a standard error") {
    const auto fit = gaussian_fit(250, 4, 13, 2);
    QuadratureSpec spec;
    spec.mc_points = 20000;
    spec.mc_seed = 4;
    const auto result = empirical_volume(fit, 0.5, spec);
    CHECK(result.monte_carlo);
    CHECK(result.std_error > 0.0);
    // Small-n volumes deflate in higher dimension; only the order of
    // magnitude is stable at this sample size.
    const double target = elliptical_volume<double>(0.5, 4, 1.0, [](double p) {
        return std::sqrt(chi_square_quantile(p, 4.0));
    });
    CHECK(result.volume > 0.15 * target);
    CHECK(result.volume < 2.5 * target);
}

TEST_CASE("volume guards: sharp fits and unreachable accuracy") {
    auto fit = gaussian_fit(100, 2, 17);
    fit.xi_log = sharp_xi_log;
    CHECK_THROWS_AS(empirical_volume(fit, 0.5), InvalidArgument);

    fit.xi_log = moderate_xi_log(100);
    QuadratureSpec impossible;
    impossible.rel_tol = 0.0;
    impossible.abs_tol = 0.0;
    impossible.max_refinements = 1;
    try {
        (void)empirical_volume(fit, 0.5, impossible);
        FAIL("expected AccuracyNotReached");
    } catch (const AccuracyNotReached& e) {
        CHECK(e.best_estimate() > 0.0);
    }

    CHECK_THROWS_AS(empirical_volume(fit, 1.5), InvalidArgument);
}

TEST_CASE("volume qq data") {
    const auto fit = gaussian_fit(500, 2, 23);
    const std::vector<double> orders = {0.2, 0.4, 0.6, 0.8};
    const auto qq = volume_qq_data(fit, VolumeReference::GaussianChiSq, orders);
    REQUIRE(qq.reference.size() == orders.size());
    for (std::size_t i = 0; i < orders.size(); ++i) {
        CHECK(qq.reference[i] ==
              doctest::Approx(elliptical_volume<double>(orders[i], 2, 1.0, gaussian_qr_2d)));
        CHECK(std::abs(qq.empirical[i] - qq.reference[i]) < 0.35 * qq.reference[i] + 0.2);
    }

    const auto log_qq = volume_qq_data(fit, VolumeReference::LogPareto, orders);
    for (std::size_t i = 0; i < orders.size(); ++i)
        CHECK(log_qq.reference[i] == doctest::Approx(-std::log(1.0 - orders[i])));

    // User-supplied radial quantile must be wired through.
    const auto user = volume_qq_data(fit, VolumeReference::UserQuantile, orders, {}, 1.0,
                                     gaussian_qr_2d);
    for (std::size_t i = 0; i < orders.size(); ++i)
        CHECK(user.reference[i] == doctest::Approx(qq.reference[i]));
    CHECK_THROWS_AS(volume_qq_data(fit, VolumeReference::UserQuantile, orders), InvalidArgument);

    CHECK_THROWS_AS(volume_qq_data(fit, VolumeReference::GaussianChiSq, {0.4, 0.2}),
                    InvalidArgument);
}

TEST_CASE("misspecified reference bends the qq curve upward") {
    // Heavy-tailed data against a gaussian reference: the high-order volume
    // overshoots the reference by much more than the central one.
    FitOptions<double> options;
    options.m = 3;
    options.seed = 31;
    const auto fit =
        build_fit(sample_student_t(600, 2, 3.0, MatrixX<double>::Identity(2, 2), 32), options);
    const auto qq = volume_qq_data(fit, VolumeReference::GaussianChiSq, {0.3, 0.9});
    const double low_ratio = qq.empirical[0] / qq.reference[0];
    const double high_ratio = qq.empirical[1] / qq.reference[1];
    CHECK(high_ratio > low_ratio);
    CHECK(high_ratio > 1.2);
}
