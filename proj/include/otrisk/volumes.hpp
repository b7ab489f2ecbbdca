#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <limits>
#include <vector>

#include "otrisk/rng.hpp"
#include "otrisk/smooth_quantile.hpp"
#include "otrisk/special.hpp"

namespace otrisk {

/// Closed-form quantile-region volume of an elliptical law,
///   V(p) = |Sigma|^{1/2} pi^{d/2} / Gamma(1 + d/2) * Q_R(p)^d.
template <typename Scalar = double, typename RadialQuantileFn>
Scalar elliptical_volume(Scalar p, Index d, Scalar sigma_det, RadialQuantileFn&& q_r) {
    if (!(p > 0 && p < 1)) throw InvalidArgument("volumes", "order p must lie in (0, 1)");
    if (!(sigma_det > 0)) throw InvalidArgument("volumes", "sigma determinant must be positive");
    const Scalar qr = q_r(p);
    if (!std::isfinite(static_cast<double>(qr)))
        throw InvalidArgument("volumes", "radial quantile is not finite at the requested order");
    return std::sqrt(sigma_det) * static_cast<Scalar>(unit_ball_volume(static_cast<int>(d))) *
           std::pow(qr, static_cast<Scalar>(d));
}

struct QuadratureSpec {
    int radial_nodes = 32;    // Gauss-Legendre nodes per radial panel
    int angular_nodes = 256;  // trapezoid nodes on the full circle (d = 2)
    int polar_nodes = 32;     // Gauss-Legendre nodes in cos(theta) (d = 3)
    int azimuth_nodes = 64;   // trapezoid nodes on the azimuth (d = 3)
    int max_refinements = 4;  // radial panel-doubling cap
    double rel_tol = 1e-3;
    double abs_tol = 1e-12;
    long mc_points = 100000;  // Monte Carlo budget (d > 3)
    int mc_strata = 100;
    std::uint64_t mc_seed = 0;
};

template <typename Scalar = double>
struct VolumeResult {
    Scalar volume = 0;
    Scalar std_error = std::numeric_limits<Scalar>::quiet_NaN();  // Monte Carlo only
    int refinements = 0;
    Scalar last_change = 0;
    bool monte_carlo = false;
};

namespace detail {

/**
 * Surface quadrature rule on the unit sphere: node directions (rows) and
 * weights summing to the sphere area. d = 2 uses the periodic trapezoid;
 * d = 3 pairs Gauss-Legendre in cos(theta) (which absorbs the sin factor of
 * the measure) with a trapezoid on the azimuth.
 */
template <typename Scalar>
std::pair<MatrixX<Scalar>, VectorX<Scalar>> sphere_rule(Index d, const QuadratureSpec& spec) {
    MatrixX<Scalar> dirs;
    VectorX<Scalar> weights;
    if (d == 1) {
        dirs.resize(2, 1);
        dirs << Scalar(1), Scalar(-1);
        weights = VectorX<Scalar>::Ones(2);
    } else if (d == 2) {
        const Index na = spec.angular_nodes;
        dirs.resize(na, 2);
        weights = VectorX<Scalar>::Constant(na, Scalar(2.0 * M_PI / static_cast<double>(na)));
        for (Index a = 0; a < na; ++a) {
            const Scalar phi = Scalar(2.0 * M_PI) * static_cast<Scalar>(a) / static_cast<Scalar>(na);
            dirs(a, 0) = std::cos(phi);
            dirs(a, 1) = std::sin(phi);
        }
    } else if (d == 3) {
        const auto [cn, cw] = gauss_legendre(spec.polar_nodes);
        const Index na = spec.azimuth_nodes;
        dirs.resize(static_cast<Index>(cn.size()) * na, 3);
        weights.resize(dirs.rows());
        Index row = 0;
        for (std::size_t t = 0; t < cn.size(); ++t) {
            const Scalar c = static_cast<Scalar>(cn[t]);
            const Scalar s = std::sqrt(std::max(Scalar(0), 1 - c * c));
            for (Index a = 0; a < na; ++a) {
                const Scalar phi =
                    Scalar(2.0 * M_PI) * static_cast<Scalar>(a) / static_cast<Scalar>(na);
                dirs(row, 0) = c;
                dirs(row, 1) = s * std::cos(phi);
                dirs(row, 2) = s * std::sin(phi);
                weights(row) =
                    static_cast<Scalar>(cw[t]) * Scalar(2.0 * M_PI / static_cast<double>(na));
                ++row;
            }
        }
    } else {
        throw InvalidArgument("volumes", "sphere_rule handles d <= 3");
    }
    return {std::move(dirs), std::move(weights)};
}

/// Iterated polar integral of the Jacobian over the ball of radius p, with
/// `panels` equal Gauss-Legendre panels in the radius.
template <typename Scalar>
Scalar polar_quadrature_pass(const CenterOutwardFit<Scalar>& fit, Scalar p, int panels,
                             const QuadratureSpec& spec,
                             const std::vector<double>& gl_nodes,
                             const std::vector<double>& gl_weights) {
    const Index d = fit.d();
    const auto [dirs, angular_weights] = sphere_rule<Scalar>(d, spec);

    KahanSum<Scalar> total;
    const Scalar panel_width = p / static_cast<Scalar>(panels);
    for (int panel = 0; panel < panels; ++panel) {
        const Scalar lo = panel_width * static_cast<Scalar>(panel);
        for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
            const Scalar r = lo + panel_width * Scalar(0.5) * (static_cast<Scalar>(gl_nodes[q]) + 1);
            const Scalar wr = panel_width * Scalar(0.5) * static_cast<Scalar>(gl_weights[q]);
            const VectorX<Scalar> jac = jacobian_batch(fit, (r * dirs).eval());
            const Scalar shell = (jac.array() * angular_weights.array()).sum();
            total.add(wr * std::pow(r, static_cast<Scalar>(d - 1)) * shell);
        }
    }
    return total.value();
}

template <typename Scalar>
VolumeResult<Scalar> monte_carlo_volume(const CenterOutwardFit<Scalar>& fit, Scalar p,
                                        const QuadratureSpec& spec) {
    const Index d = fit.d();
    const int strata = std::max(1, spec.mc_strata);
    const long per_stratum = std::max<long>(2, spec.mc_points / strata);
    Rng rng(spec.mc_seed, /*stream=*/0x70);
    const Scalar ball = static_cast<Scalar>(unit_ball_volume(static_cast<int>(d))) *
                        std::pow(p, static_cast<Scalar>(d));
    Scalar mean_sum = 0;
    Scalar var_sum = 0;
    MatrixX<Scalar> points(per_stratum, d);
    for (int k = 0; k < strata; ++k) {
        for (long i = 0; i < per_stratum; ++i) {
            const Scalar t = (static_cast<Scalar>(k) + static_cast<Scalar>(rng.uniform())) /
                             static_cast<Scalar>(strata);
            const Scalar r = p * std::pow(t, Scalar(1) / static_cast<Scalar>(d));
            for (;;) {
                for (Index c = 0; c < d; ++c) points(i, c) = static_cast<Scalar>(rng.normal());
                const Scalar norm = points.row(i).norm();
                if (norm > 0) {
                    points.row(i) *= r / norm;
                    break;
                }
            }
        }
        const VectorX<Scalar> jac = jacobian_batch(fit, points);
        const Scalar mu = jac.mean();
        const Scalar var = (jac.array() - mu).square().sum() /
                           static_cast<Scalar>(per_stratum - 1);
        mean_sum += mu;
        var_sum += var / static_cast<Scalar>(per_stratum);
    }
    VolumeResult<Scalar> result;
    result.monte_carlo = true;
    result.volume = ball * mean_sum / static_cast<Scalar>(strata);
    result.std_error = ball * std::sqrt(var_sum) / static_cast<Scalar>(strata);
    return result;
}

}  // namespace detail

/**
 * Volume of the empirical quantile region of order p: the integral of the
 * smoothed-map Jacobian over the ball of radius p, in polar coordinates.
 * Radial panels refine by doubling until the estimate is stable; d > 3
 * falls back to radius-stratified Monte Carlo with a standard error.
 *
 * Fits smoothed at extreme xi are rejected: their Jacobian is a field of
 * near-delta spikes no quadrature can resolve.
 */
template <typename Scalar>
VolumeResult<Scalar> empirical_volume(const CenterOutwardFit<Scalar>& fit, Scalar p,
                                      const QuadratureSpec& spec = {}) {
    if (!(p > 0 && p < 1)) throw InvalidArgument("volumes", "order p must lie in (0, 1)");
    if (fit.xi_log > 50)
        throw InvalidArgument("volumes",
                              "xi is too large for volume quadrature (ln xi = " +
                                  std::to_string(static_cast<double>(fit.xi_log)) +
                                  "); rebuild or evaluate the fit at a moderate xi");
    const Index d = fit.d();
    if (d > 3) return detail::monte_carlo_volume(fit, p, spec);

    const auto [gl_nodes, gl_weights] = gauss_legendre(spec.radial_nodes);
    VolumeResult<Scalar> result;
    Scalar prev = std::numeric_limits<Scalar>::quiet_NaN();
    int panels = 1;
    for (int level = 0; level <= spec.max_refinements; ++level) {
        const Scalar value = detail::polar_quadrature_pass(fit, p, panels, spec, gl_nodes, gl_weights);
        result.volume = value;
        result.refinements = level;
        if (level > 0) {
            result.last_change = std::abs(value - prev);
            if (result.last_change <=
                static_cast<Scalar>(spec.rel_tol) * std::abs(value) +
                    static_cast<Scalar>(spec.abs_tol))
                return result;
        }
        prev = value;
        panels *= 2;
    }
    throw AccuracyNotReached(
        "volume quadrature did not stabilize within " + std::to_string(spec.max_refinements) +
            " radial refinements",
        static_cast<double>(result.volume), static_cast<double>(result.last_change));
}

enum class VolumeMethod { ClosedFormElliptical, Quadrature, MonteCarlo };

template <typename Scalar = double>
struct VolumeCurve {
    std::vector<Scalar> orders;
    std::vector<Scalar> volumes;
    VolumeMethod method = VolumeMethod::Quadrature;
    std::vector<Scalar> std_errors;  // Monte Carlo only
};

template <typename Scalar>
VolumeCurve<Scalar> empirical_volume_curve(const CenterOutwardFit<Scalar>& fit,
                                           const std::vector<Scalar>& orders,
                                           const QuadratureSpec& spec = {}) {
    VolumeCurve<Scalar> curve;
    curve.method = fit.d() > 3 ? VolumeMethod::MonteCarlo : VolumeMethod::Quadrature;
    for (const Scalar p : orders) {
        const auto result = empirical_volume(fit, p, spec);
        curve.orders.push_back(p);
        curve.volumes.push_back(result.volume);
        if (result.monte_carlo) curve.std_errors.push_back(result.std_error);
    }
    return curve;
}

enum class VolumeReference { GaussianChiSq, UserQuantile, LogPareto };

/**
 * QQ data pairing reference against empirical volumes. GaussianChiSq uses
 * the closed form with the chi-square radial quantile; UserQuantile takes a
 * caller-supplied radial quantile; LogPareto emits the heavy-tail variant
 * (-log(1 - p), log V(p)) where the upper end should look linear.
 */
template <typename Scalar = double>
struct VolumeQQData {
    std::vector<Scalar> reference;
    std::vector<Scalar> empirical;
    VolumeReference kind = VolumeReference::GaussianChiSq;
};

template <typename Scalar>
VolumeQQData<Scalar> volume_qq_data(
    const CenterOutwardFit<Scalar>& fit, VolumeReference reference,
    const std::vector<Scalar>& orders, const QuadratureSpec& spec = {},
    std::type_identity_t<Scalar> sigma_det = Scalar(1),
    const std::function<std::type_identity_t<Scalar>(std::type_identity_t<Scalar>)>& user_quantile = nullptr) {
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (!(orders[i] > 0 && orders[i] < 1))
            throw InvalidArgument("volumes", "orders must lie in (0, 1)");
        if (i > 0 && !(orders[i] > orders[i - 1]))
            throw InvalidArgument("volumes", "orders must be strictly increasing");
    }
    const Index d = fit.d();
    VolumeQQData<Scalar> data;
    data.kind = reference;
    for (const Scalar p : orders) {
        const Scalar volume = empirical_volume(fit, p, spec).volume;
        switch (reference) {
            case VolumeReference::GaussianChiSq:
                data.reference.push_back(elliptical_volume<Scalar>(
                    p, d, sigma_det, [&](Scalar q) {
                        return static_cast<Scalar>(std::sqrt(chi_square_quantile(
                            static_cast<double>(q), static_cast<double>(d))));
                    }));
                data.empirical.push_back(volume);
                break;
            case VolumeReference::UserQuantile:
                if (!user_quantile)
                    throw InvalidArgument("volumes", "UserQuantile reference needs a quantile fn");
                data.reference.push_back(elliptical_volume<Scalar>(p, d, sigma_det, user_quantile));
                data.empirical.push_back(volume);
                break;
            case VolumeReference::LogPareto:
                data.reference.push_back(-std::log(1 - p));
                data.empirical.push_back(std::log(volume));
                break;
        }
    }
    return data;
}

}  // namespace otrisk
