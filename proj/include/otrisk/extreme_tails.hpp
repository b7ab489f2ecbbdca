#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "otrisk/common.hpp"
#include "otrisk/smooth_quantile.hpp"

namespace otrisk {

/**
 * The potential observables Y_i = <u_i, Q(u_i)> of a fit, kept both in
 * sample order and sorted ascending. The unsmoothed version reads the
 * coupling pairs directly; the smoothed one evaluates the smoothed
 * quantile map at the gridpoints.
 */
template <typename Scalar = double>
struct YSeries {
    VectorX<Scalar> values;
    VectorX<Scalar> sorted;
    bool smoothed = false;

    Index n() const { return values.size(); }
};

template <typename Scalar = double>
YSeries<Scalar> make_y_series(VectorX<Scalar> values, bool smoothed = false) {
    YSeries<Scalar> series;
    series.sorted = values;
    series.values = std::move(values);
    std::stable_sort(series.sorted.data(), series.sorted.data() + series.sorted.size());
    series.smoothed = smoothed;
    return series;
}

template <typename Scalar>
YSeries<Scalar> y_values(const CenterOutwardFit<Scalar>& fit, bool smoothed = false) {
    VectorX<Scalar> vals;
    if (smoothed) {
        const MatrixX<Scalar> q = smoothed_quantile_batch(fit, fit.grid_points);
        vals = (fit.grid_points.array() * q.array()).rowwise().sum();
    } else {
        vals = (fit.grid_points.array() * fit.observations.array()).rowwise().sum();
    }
    return make_y_series(std::move(vals), smoothed);
}

/**
 * Pareto QQ data: points (-log(1 - (n-j+1)/(n+1)), log Y_{n-j+1,n}) over the
 * positive order statistics, emitted in ascending-abscissa order.
 * Nonpositive values cannot enter the log and are dropped, with the count
 * reported.
 */
template <typename Scalar = double>
struct ParetoQQData {
    std::vector<Scalar> log_exponential_quantile;  // abscissae, ascending
    std::vector<Scalar> log_order_statistic;
    Index dropped = 0;
};

template <typename Scalar>
ParetoQQData<Scalar> pareto_qq_data(const YSeries<Scalar>& y) {
    std::vector<Scalar> positive;
    positive.reserve(static_cast<std::size_t>(y.n()));
    for (Index i = 0; i < y.n(); ++i)
        if (y.sorted(i) > 0) positive.push_back(y.sorted(i));
    ParetoQQData<Scalar> data;
    data.dropped = y.n() - static_cast<Index>(positive.size());
    const auto n = static_cast<Index>(positive.size());
    if (n < 2)
        throw InsufficientData("extreme_tails",
                               "need at least 2 positive potential values, have " +
                                   std::to_string(n));
    data.log_exponential_quantile.reserve(static_cast<std::size_t>(n));
    data.log_order_statistic.reserve(static_cast<std::size_t>(n));
    for (Index rank = 1; rank <= n; ++rank) {  // ascending order statistics
        const Scalar tail_prob =
            1 - static_cast<Scalar>(rank) / static_cast<Scalar>(n + 1);
        data.log_exponential_quantile.push_back(-std::log(tail_prob));
        data.log_order_statistic.push_back(std::log(positive[static_cast<std::size_t>(rank - 1)]));
    }
    return data;
}

/// Hill estimator H_{k,n} = (1/k) sum_{j<=k} log(Y_{n-j+1,n} / Y_{n-k,n}).
template <typename Scalar>
Scalar hill_estimate(const YSeries<Scalar>& y, Index k) {
    const Index n = y.n();
    if (k < 1 || k > n - 1)
        throw InvalidArgument("extreme_tails", "hill_estimate needs 1 <= k <= n-1");
    const Scalar threshold = y.sorted(n - k - 1);
    if (!(threshold > 0))
        throw InvalidArgument("extreme_tails",
                              "hill_estimate needs a positive threshold order statistic");
    Scalar sum = 0;
    for (Index j = 1; j <= k; ++j) sum += std::log(y.sorted(n - j) / threshold);
    return sum / static_cast<Scalar>(k);
}

/**
 * Ridge-regularized regression estimator of the extreme value index,
 *
 *   gamma_k(tau) = H_{k,n}
 *       - cbar * sum_j (c_j - cbar) j log(Y_{n-j+1}/Y_{n-j})
 *         / ( sum_j (c_j - cbar)^2 + k tau ),
 *
 * with covariates c_j = (j/(k+1))^{-rho}, rho < 0. tau = 0 is the plain
 * least-squares bias correction.
 */
template <typename Scalar>
Scalar ridge_estimate(const YSeries<Scalar>& y, Index k, Scalar tau,
                      Scalar second_order_rho = Scalar(-1)) {
    const Index n = y.n();
    if (k < 2 || k > n - 1)
        throw InvalidArgument("extreme_tails", "ridge_estimate needs 2 <= k <= n-1");
    if (!(tau >= 0)) throw InvalidArgument("extreme_tails", "tau must be >= 0");
    if (!(second_order_rho < 0))
        throw InvalidArgument("extreme_tails", "second_order_rho must be negative");
    const Scalar threshold = y.sorted(n - k - 1);
    if (!(threshold > 0))
        throw InvalidArgument("extreme_tails",
                              "ridge_estimate needs a positive threshold order statistic");

    VectorX<Scalar> c(k), z(k);
    for (Index j = 1; j <= k; ++j) {
        c(j - 1) = std::pow(static_cast<Scalar>(j) / static_cast<Scalar>(k + 1),
                            -second_order_rho);
        z(j - 1) = static_cast<Scalar>(j) * std::log(y.sorted(n - j) / y.sorted(n - j - 1));
    }
    const Scalar cbar = c.mean();
    const VectorX<Scalar> centered = c.array() - cbar;
    const Scalar denom = centered.squaredNorm() + static_cast<Scalar>(k) * tau;
    if (!(denom > 0))
        throw InvalidArgument("extreme_tails", "degenerate covariate spread in ridge_estimate");
    const Scalar hill = z.mean();  // = H_{k,n} by the telescoping identity
    return hill - cbar * centered.dot(z) / denom;
}

template <typename Scalar>
Scalar least_squares_estimate(const YSeries<Scalar>& y, Index k,
                              Scalar second_order_rho = Scalar(-1)) {
    return ridge_estimate(y, k, Scalar(0), second_order_rho);
}

/**
 * Hill / least-squares / ridge curves over a k range.
 */
template <typename Scalar = double>
struct EviEstimates {
    std::vector<Index> ks;
    std::vector<Scalar> hill;
    std::vector<Scalar> ls;
    std::vector<Scalar> ridge;
    Scalar tau = 0;
    Scalar second_order_rho = -1;
    Index dropped = 0;  // nonpositive values excluded from the order statistics
};

template <typename Scalar>
EviEstimates<Scalar> evi_curves(const YSeries<Scalar>& y, Index k_max, Scalar tau = 0,
                                Scalar second_order_rho = Scalar(-1)) {
    // Work on the positive part; tail orders concern large Y only.
    std::vector<Scalar> positive;
    for (Index i = 0; i < y.n(); ++i)
        if (y.sorted(i) > 0) positive.push_back(y.sorted(i));
    EviEstimates<Scalar> estimates;
    estimates.tau = tau;
    estimates.second_order_rho = second_order_rho;
    estimates.dropped = y.n() - static_cast<Index>(positive.size());
    const auto n = static_cast<Index>(positive.size());
    if (n < 3)
        throw InsufficientData("extreme_tails",
                               "need at least 3 positive potential values for EVI curves");
    VectorX<Scalar> vals(n);
    for (Index i = 0; i < n; ++i) vals(i) = positive[static_cast<std::size_t>(i)];
    const YSeries<Scalar> trimmed = make_y_series(std::move(vals), y.smoothed);
    const Index top = std::min(k_max, n - 1);
    for (Index k = 2; k <= top; ++k) {
        estimates.ks.push_back(k);
        estimates.hill.push_back(hill_estimate(trimmed, k));
        estimates.ls.push_back(ridge_estimate(trimmed, k, Scalar(0), second_order_rho));
        estimates.ridge.push_back(ridge_estimate(trimmed, k, tau, second_order_rho));
    }
    return estimates;
}

/// Two-sample Kolmogorov-Smirnov distance between the ECDF of the series
/// and the ECDF of an oracle sample.
template <typename Scalar>
Scalar ecdf_distance(const YSeries<Scalar>& y, const VectorX<Scalar>& oracle_sample) {
    if (y.n() == 0 || oracle_sample.size() == 0)
        throw InvalidArgument("extreme_tails", "ecdf_distance needs nonempty samples");
    std::vector<Scalar> a(y.sorted.data(), y.sorted.data() + y.n());
    std::vector<Scalar> b(oracle_sample.data(), oracle_sample.data() + oracle_sample.size());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<Scalar>(a.size());
    const auto nb = static_cast<Scalar>(b.size());
    Scalar distance = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const Scalar x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        distance = std::max(distance, std::abs(static_cast<Scalar>(ia) / na -
                                               static_cast<Scalar>(ib) / nb));
    }
    return distance;
}

}  // namespace otrisk
