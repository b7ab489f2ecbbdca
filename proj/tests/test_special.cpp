#include <doctest.h>

#include <cmath>

#include "otrisk/special.hpp"

using namespace otrisk;

TEST_CASE("regularized incomplete gamma against frozen references") {
    // Reference values computed with an independent implementation.
    struct Row {
        double a, x, p;
    };
    const Row rows[] = {
        {0.5, 0.25, 0.5204998778130466},
        {1.5, 2.0, 0.7385358700508888},
        {5.0, 4.5, 0.4678964236252849},
        {2.5, 10.0, 0.9987502694369687},
    };
    for (const auto& r : rows)
        CHECK(regularized_gamma_p(r.a, r.x) == doctest::Approx(r.p).epsilon(1e-12));
}

TEST_CASE("chi-square quantiles against frozen references") {
    struct Row {
        double dof, p, q;
    };
    const Row rows[] = {
        {1, 0.05, 0.003932140000019522}, {1, 0.5, 0.454936423119572},
        {1, 0.95, 3.841458820694124},    {1, 0.99, 6.6348966010212145},
        {2, 0.05, 0.10258658877510106},  {2, 0.5, 1.386294361119891},
        {2, 0.95, 5.991464547107979},    {2, 0.99, 9.21034037197618},
        {3, 0.05, 0.35184631774927144},  {3, 0.5, 2.3659738843753377},
        {3, 0.95, 7.814727903251179},    {3, 0.99, 11.344866730144373},
        {5, 0.05, 1.1454762260617692},   {5, 0.5, 4.351460191095526},
        {5, 0.95, 11.070497693516351},   {5, 0.99, 15.08627246938899},
        {10, 0.05, 3.9402991361190605},  {10, 0.5, 9.34181776559197},
        {10, 0.95, 18.307038053275146},  {10, 0.99, 23.209251158954356},
    };
    for (const auto& r : rows)
        CHECK(chi_square_quantile(r.p, r.dof) == doctest::Approx(r.q).epsilon(1e-10));
}

TEST_CASE("chi-square dof 2 closed form") {
    // For two degrees of freedom the quantile is -2 log(1 - p).
    for (const double p : {0.1, 0.5, 0.9, 0.99})
        CHECK(chi_square_quantile(p, 2) == doctest::Approx(-2.0 * std::log1p(-p)).epsilon(1e-12));
}

TEST_CASE("chi-square cdf and quantile are inverse") {
    for (const double dof : {1.0, 2.5, 7.0})
        for (const double p : {0.01, 0.3, 0.8, 0.999})
            CHECK(chi_square_cdf(chi_square_quantile(p, dof), dof) ==
                  doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * M_PI));
    CHECK(unit_ball_volume(4) == doctest::Approx(M_PI * M_PI / 2.0));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const auto [nodes, weights] = gauss_legendre(8);
    double linear = 0, quartic = 0, total = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        total += weights[i];
        linear += weights[i] * nodes[i];
        quartic += weights[i] * std::pow(nodes[i], 4);
    }
    CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(linear == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(quartic == doctest::Approx(2.0 / 5.0).epsilon(1e-13));

    const auto [n32, w32] = gauss_legendre(32);
    double cosint = 0;
    for (std::size_t i = 0; i < n32.size(); ++i) cosint += w32[i] * std::cos(n32[i]);
    CHECK(cosint == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-14));
}
