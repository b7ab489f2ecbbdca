#pragma once

#include <cstdint>

#include "otrisk/rng.hpp"
#include "otrisk/smooth_quantile.hpp"

namespace otrisk {

namespace detail {

/// Heights <u_i, Q_hat(u_i)> at the fit's own gridpoints.
template <typename Scalar>
VectorX<Scalar> own_gridpoint_heights(const CenterOutwardFit<Scalar>& fit) {
    const MatrixX<Scalar> q = smoothed_quantile_batch(fit, fit.grid_points);
    return (fit.grid_points.array() * q.array()).rowwise().sum();
}

}  // namespace detail

/// Maximal correlation risk, rho_hat = (1/n) sum_i <u_i, Q_hat(u_i)>.
template <typename Scalar>
Scalar rho_hat(const CenterOutwardFit<Scalar>& fit) {
    return detail::own_gridpoint_heights(fit).mean();
}

/// Tail variant: conditional mean over gridpoints with |u_i| > 1 - p.
template <typename Scalar>
Scalar rho_tail(const CenterOutwardFit<Scalar>& fit, Scalar p) {
    if (!(p > 0 && p < 1)) throw InvalidArgument("risk", "tail order p must lie in (0, 1)");
    const VectorX<Scalar> heights = detail::own_gridpoint_heights(fit);
    const VectorX<Scalar> norms = fit.grid_points.rowwise().norm();
    Scalar sum = 0;
    Index count = 0;
    for (Index i = 0; i < fit.n(); ++i) {
        if (norms(i) > 1 - p) {
            sum += heights(i);
            ++count;
        }
    }
    if (count == 0)
        throw InsufficientTailPoints("no gridpoints with |u| > " + std::to_string(1 - p));
    return sum / static_cast<Scalar>(count);
}

/// Trimmed variant: conditional mean over gridpoints with |u_i| <= 1 - p.
template <typename Scalar>
Scalar rho_trimmed(const CenterOutwardFit<Scalar>& fit, Scalar p) {
    if (!(p > 0 && p < 1)) throw InvalidArgument("risk", "tail order p must lie in (0, 1)");
    const VectorX<Scalar> heights = detail::own_gridpoint_heights(fit);
    const VectorX<Scalar> norms = fit.grid_points.rowwise().norm();
    Scalar sum = 0;
    Index count = 0;
    for (Index i = 0; i < fit.n(); ++i) {
        if (norms(i) <= 1 - p) {
            sum += heights(i);
            ++count;
        }
    }
    if (count == 0)
        throw InsufficientTailPoints("no gridpoints with |u| <= " + std::to_string(1 - p));
    return sum / static_cast<Scalar>(count);
}

/**
 * Global, tail, and trimmed risk at tail order p. At empirical weights the
 * decomposition n rho = n_tail rho_tail + (n - n_tail) rho_trimmed is an
 * identity of conditional means.
 */
template <typename Scalar = double>
struct RiskReport {
    Scalar rho = 0;
    Scalar p = 0;
    Scalar rho_tail = 0;
    Scalar rho_trimmed = 0;
    Index n_tail = 0;
    Index n = 0;
};

template <typename Scalar>
RiskReport<Scalar> risk_report(const CenterOutwardFit<Scalar>& fit, Scalar p) {
    if (!(p > 0 && p < 1)) throw InvalidArgument("risk", "tail order p must lie in (0, 1)");
    const VectorX<Scalar> heights = detail::own_gridpoint_heights(fit);
    const VectorX<Scalar> norms = fit.grid_points.rowwise().norm();
    RiskReport<Scalar> report;
    report.p = p;
    report.n = fit.n();
    Scalar tail_sum = 0, trim_sum = 0;
    Index tail_count = 0;
    for (Index i = 0; i < fit.n(); ++i) {
        if (norms(i) > 1 - p) {
            tail_sum += heights(i);
            ++tail_count;
        } else {
            trim_sum += heights(i);
        }
    }
    if (tail_count == 0)
        throw InsufficientTailPoints("no gridpoints with |u| > " + std::to_string(1 - p));
    if (tail_count == fit.n())
        throw InsufficientTailPoints("no gridpoints with |u| <= " + std::to_string(1 - p));
    report.n_tail = tail_count;
    report.rho = heights.mean();
    report.rho_tail = tail_sum / static_cast<Scalar>(tail_count);
    report.rho_trimmed = trim_sum / static_cast<Scalar>(fit.n() - tail_count);
    return report;
}

/// Heights <u, Q_hat(u)> for caller-chosen evaluation points (one per row).
template <typename Scalar, typename Derived>
VectorX<Scalar> risk_surface(const CenterOutwardFit<Scalar>& fit,
                             const Eigen::MatrixBase<Derived>& eval_points) {
    if (eval_points.cols() != fit.d())
        throw InvalidArgument("risk", "evaluation points dimension mismatch");
    const MatrixX<Scalar> q = smoothed_quantile_batch(fit, eval_points);
    return (eval_points.derived().array() * q.array()).rowwise().sum();
}

/// Variance diagnostic: rho averaged over fresh spherical-uniform draws
/// instead of the fit's own gridpoints.
template <typename Scalar>
Scalar rho_hat_resampled(const CenterOutwardFit<Scalar>& fit, Index n_draws, std::uint64_t seed) {
    if (n_draws < 1) throw InvalidArgument("risk", "n_draws must be >= 1");
    Rng rng(seed);
    const Index d = fit.d();
    MatrixX<Scalar> eval(n_draws, d);
    for (Index i = 0; i < n_draws; ++i) {
        for (;;) {
            for (Index j = 0; j < d; ++j) eval(i, j) = static_cast<Scalar>(rng.normal());
            const Scalar norm = eval.row(i).norm();
            if (norm > 0) {
                eval.row(i) *= static_cast<Scalar>(rng.uniform()) / norm;
                break;
            }
        }
    }
    return risk_surface(fit, eval).mean();
}

}  // namespace otrisk
