#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "otrisk/errors.hpp"

namespace otrisk {

/// Regularized lower incomplete gamma P(a, x). Series expansion below the
/// diagonal x < a+1, Lentz continued fraction above it.
inline double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0)
        throw InvalidArgument("special", "regularized_gamma_p needs a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    const double lga = std::lgamma(a);
    const double prefix = std::exp(a * std::log(x) - x - lga);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return prefix * sum;
    }
    // Continued fraction for Q(a, x), modified Lentz.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - prefix * h;
}

/// Inverse of P(a, .) by bracketing bisection; accuracy is limited by the
/// forward evaluation, plenty for quantile oracles.
inline double inverse_regularized_gamma_p(double a, double p) {
    if (!(p >= 0.0 && p < 1.0))
        throw InvalidArgument("special", "inverse_regularized_gamma_p needs p in [0, 1)");
    if (p == 0.0) return 0.0;
    double lo = 0.0;
    double hi = std::max(4.0 * a, 8.0);
    while (regularized_gamma_p(a, hi) < p) {
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (regularized_gamma_p(a, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Quantile of the chi-square distribution with dof degrees of freedom.
inline double chi_square_quantile(double p, double dof) {
    if (dof <= 0.0) throw InvalidArgument("special", "chi_square_quantile needs dof > 0");
    return 2.0 * inverse_regularized_gamma_p(0.5 * dof, p);
}

inline double chi_square_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

/// Lebesgue volume of the d-dimensional unit ball, computed in log domain.
inline double unit_ball_volume(int d) {
    if (d < 1) throw InvalidArgument("special", "unit_ball_volume needs d >= 1");
    const double half_d = 0.5 * static_cast<double>(d);
    return std::exp(half_d * std::log(M_PI) - std::lgamma(half_d + 1.0));
}

/**
 * Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on the
 * Legendre recurrence. Exact for polynomials of degree 2n-1.
 */
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("special", "gauss_legendre needs n >= 1");
    std::vector<double> nodes(n), weights(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    return {std::move(nodes), std::move(weights)};
}

}  // namespace otrisk
