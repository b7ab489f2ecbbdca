#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "otrisk/common.hpp"
#include "otrisk/rng.hpp"

namespace otrisk {

/**
 * Everything needed to evaluate the convex potential and its log-sum-exp
 * smoothing: paired gridpoints/observations, the affine offsets lambda
 * (normalized so min lambda = 0), the separation margin delta, and the
 * smoothing level as ln(xi).
 *
 * Immutable after construction; all evaluations are const and thread-safe.
 */
template <typename Scalar = double>
struct CenterOutwardFit {
    MatrixX<Scalar> grid_points;   // u_i, one per row, inside the unit ball
    MatrixX<Scalar> observations;  // X_i, one per row
    VectorX<Scalar> lambda;
    Scalar delta = 0;      // realized margin min_{i!=j} <u_i, X_i - X_j> - (l_i - l_j)
    Scalar delta_opt = 0;  // optimal value of the margin program
    Scalar xi_log = 0;     // ln(xi)
    Index m = 1;           // number of averaged grids behind the pairs
    std::vector<std::uint64_t> grid_seeds;

    Index n() const { return observations.rows(); }
    Index d() const { return observations.cols(); }
    Scalar xi() const { return std::exp(xi_log); }
};

/// Smoothing level xi = (log n)^2, which satisfies xi_n / log n -> infinity.
inline double moderate_xi_log(Index n) {
    if (n < 2) return 0.0;
    return 2.0 * std::log(std::log(static_cast<double>(n)));
}

/// Smoothing level used for contour displays: ln(xi) = 300, i.e. the softmax
/// is an argmax for all practical purposes.
inline constexpr double sharp_xi_log = 300.0;

template <typename Scalar = double>
struct LambdaSolution {
    VectorX<Scalar> lambda;  // shifted so min = 0
    Scalar delta = 0;        // optimal margin (minimum cycle mean)
    Scalar margin = 0;       // realized margin of the returned lambda
};

/**
 * Maximize delta subject to lambda_i - lambda_j <= <u_i, X_i - X_j> - delta
 * over all i != j.
 *
 * The constraints form a difference system on the complete digraph with arc
 * (j -> i) of weight c_ij := <u_i, X_i - X_j>; the optimum is the minimum
 * directed-cycle mean, computed with Karp's recurrence. Lambda is recovered
 * as shortest-path potentials at delta - eta (eta = 1e-9 * max|c_ij|), which
 * keeps the returned constraints strictly feasible.
 */
template <typename Scalar = double>
LambdaSolution<Scalar> solve_lambda(const MatrixX<Scalar>& U, const MatrixX<Scalar>& X) {
    const Index n = U.rows();
    if (n < 2) throw InvalidArgument("smooth_quantile", "solve_lambda needs n >= 2");
    if (X.rows() != n || X.cols() != U.cols())
        throw InvalidArgument("smooth_quantile", "paired matrices must have equal shape");
    if (!U.allFinite() || !X.allFinite())
        throw InvalidData("smooth_quantile", "solve_lambda needs finite pairs");

    const Scalar inf = std::numeric_limits<Scalar>::infinity();

    // A(j, i) = <u_i, X_j>; c_ij = diag(i) - A(j, i). The diagonal is set to
    // -inf so that column-wise (v - A.col(i)) minima skip j == i.
    MatrixX<Scalar> A = X * U.transpose();
    const VectorX<Scalar> diag = A.diagonal();
    const Scalar scale = [&] {
        Scalar s = 0;
        for (Index i = 0; i < n; ++i)
            s = std::max(s, (diag(i) - A.col(i).array()).abs().maxCoeff());
        return s;
    }();
    A.diagonal().setConstant(-inf);

    const Scalar eta = Scalar(1e-9) * scale;
    const Scalar feasibility_tol = 2 * eta;

    // Karp: D(i, k) = least weight of a k-arc walk from node 0 to i.
    MatrixX<Scalar> D(n, n + 1);
    D.col(0).setConstant(inf);
    D(0, 0) = 0;
    for (Index k = 1; k <= n; ++k) {
        for (Index i = 0; i < n; ++i)
            D(i, k) = diag(i) + (D.col(k - 1) - A.col(i)).minCoeff();
    }
    Scalar delta_opt = inf;
    for (Index i = 0; i < n; ++i) {
        if (!(D(i, n) < inf)) continue;
        Scalar worst = -inf;
        for (Index k = 0; k < n; ++k) {
            if (!(D(i, k) < inf)) continue;
            worst = std::max(worst, (D(i, n) - D(i, k)) / static_cast<Scalar>(n - k));
        }
        if (worst > -inf) delta_opt = std::min(delta_opt, worst);
    }

    if (!(delta_opt > feasibility_tol)) {
        // Name the tightest two-cycle; duplicates show up here as mean zero.
        Index bad_i = 0, bad_j = 1;
        Scalar best = inf;
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) {
                const Scalar mean2 = ((diag(i) - A(j, i)) + (diag(j) - A(i, j))) / 2;
                if (mean2 < best) {
                    best = mean2;
                    bad_i = i;
                    bad_j = j;
                }
            }
        }
        throw DegenerateConfiguration(
            "potential margin is not positive (observations " + std::to_string(bad_i) + " and " +
                std::to_string(bad_j) + " are duplicated or degenerate)",
            bad_i, bad_j);
    }

    // Bellman-Ford potentials from a virtual all-zero source at delta - eta.
    const Scalar delta_feas = delta_opt - eta;
    VectorX<Scalar> pot = VectorX<Scalar>::Zero(n);
    for (Index pass = 0; pass < n; ++pass) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            const Scalar cand = diag(i) - delta_feas + (pot - A.col(i)).minCoeff();
            if (cand < pot(i)) {
                pot(i) = cand;
                changed = true;
            }
        }
        if (!changed) break;
    }

    LambdaSolution<Scalar> solution;
    solution.lambda = pot.array() - pot.minCoeff();
    solution.delta = delta_opt;
    Scalar margin = inf;
    for (Index i = 0; i < n; ++i)
        margin = std::min(margin,
                          diag(i) - solution.lambda(i) +
                              (solution.lambda - A.col(i)).minCoeff());
    solution.margin = margin;
    return solution;
}

/// Fit from already-paired points; lambda/delta solved internally.
template <typename Scalar = double>
CenterOutwardFit<Scalar> make_fit(MatrixX<Scalar> grid_points, MatrixX<Scalar> observations,
                                  Scalar xi_log) {
    CenterOutwardFit<Scalar> fit;
    fit.xi_log = xi_log;
    if (observations.rows() == 1) {
        fit.lambda = VectorX<Scalar>::Zero(1);
        fit.delta = std::numeric_limits<Scalar>::infinity();
        fit.delta_opt = fit.delta;
    } else {
        auto solution = solve_lambda<Scalar>(grid_points, observations);
        fit.lambda = std::move(solution.lambda);
        fit.delta = solution.margin;
        fit.delta_opt = solution.delta;
    }
    fit.grid_points = std::move(grid_points);
    fit.observations = std::move(observations);
    return fit;
}

// ---------------------------------------------------------------------------
// Potential and quantile evaluation.

template <typename Scalar, typename Derived>
VectorX<Scalar> psi_values(const CenterOutwardFit<Scalar>& fit,
                           const Eigen::MatrixBase<Derived>& u) {
    return fit.observations * u - fit.lambda;
}

template <typename Scalar>
struct PsiMax {
    Scalar value;
    Index argmax;
};

/// Psi_n(u) = max_i psi_i(u); ties resolve to the lowest index.
template <typename Scalar, typename Derived>
PsiMax<Scalar> psi_max(const CenterOutwardFit<Scalar>& fit, const Eigen::MatrixBase<Derived>& u) {
    const VectorX<Scalar> psi = psi_values(fit, u);
    Index arg = 0;
    const Scalar value = psi.maxCoeff(&arg);
    return {value, arg};
}

/// Softmax weights in log domain. Everything is centered on max psi before
/// exponentiation, so the result stays finite for xi as large as e^300;
/// weights whose exponent underflows become exact zeros.
/// Log-weights below this underflow in exp(); they flush to exact zero.
inline constexpr double log_weight_floor = -745.0;

template <typename Scalar = double>
struct WeightVector {
    VectorX<Scalar> log_weights;

    VectorX<Scalar> weights() const {
        return (log_weights.array() < Scalar(log_weight_floor))
            .select(Scalar(0), log_weights.array().exp());
    }
};

template <typename Scalar, typename Derived>
VectorX<Scalar> softmax_log_weights(const CenterOutwardFit<Scalar>& fit,
                                    const Eigen::MatrixBase<Derived>& u) {
    const VectorX<Scalar> psi = psi_values(fit, u);
    const Scalar top = psi.maxCoeff();
    const VectorX<Scalar> scaled = fit.xi() * (psi.array() - top);
    const Scalar log_z = std::log(scaled.array().exp().sum());
    return scaled.array() - log_z;
}

template <typename Scalar, typename Derived>
WeightVector<Scalar> softmax_weights(const CenterOutwardFit<Scalar>& fit,
                                     const Eigen::MatrixBase<Derived>& u) {
    return {softmax_log_weights(fit, u)};
}

/// Psi_{n,xi}(u) = (1/xi) log sum_i exp(xi psi_i(u)), evaluated as
/// Psi_n(u) + (1/xi) log sum exp(xi (psi_i - Psi_n)).
template <typename Scalar, typename Derived>
Scalar smoothed_potential(const CenterOutwardFit<Scalar>& fit,
                          const Eigen::MatrixBase<Derived>& u) {
    const VectorX<Scalar> psi = psi_values(fit, u);
    const Scalar top = psi.maxCoeff();
    const Scalar xi = fit.xi();
    const Scalar log_z = std::log((xi * (psi.array() - top)).exp().sum());
    return top + log_z / xi;
}

/// Q_hat_{n,xi}(u) = sum_i w_i(u) X_i, the gradient of the smoothed potential.
template <typename Scalar, typename Derived>
VectorX<Scalar> smoothed_quantile(const CenterOutwardFit<Scalar>& fit,
                                  const Eigen::MatrixBase<Derived>& u) {
    const VectorX<Scalar> w = WeightVector<Scalar>{softmax_log_weights(fit, u)}.weights();
    return fit.observations.transpose() * w;
}

/// Softmax weight rows for a block of evaluation points (k x n result).
template <typename Scalar, typename Derived>
MatrixX<Scalar> softmax_weights_batch(const CenterOutwardFit<Scalar>& fit,
                                      const Eigen::MatrixBase<Derived>& eval_points) {
    MatrixX<Scalar> S = eval_points * fit.observations.transpose();  // k x n
    S.rowwise() -= fit.lambda.transpose();
    const Scalar xi = fit.xi();
    for (Index r = 0; r < S.rows(); ++r) {
        const Scalar top = S.row(r).maxCoeff();
        const auto scaled = (xi * (S.row(r).array() - top)).eval();
        S.row(r) = (scaled < Scalar(log_weight_floor)).select(Scalar(0), scaled.exp());
        S.row(r) /= S.row(r).sum();
    }
    return S;
}

/// Batched smoothed quantile map: one row of output per row of eval_points.
template <typename Scalar, typename Derived>
MatrixX<Scalar> smoothed_quantile_batch(const CenterOutwardFit<Scalar>& fit,
                                        const Eigen::MatrixBase<Derived>& eval_points) {
    return softmax_weights_batch(fit, eval_points) * fit.observations;
}

template <typename Scalar = double>
struct JacobianResult {
    Scalar value = 0;
    Scalar log_value = -std::numeric_limits<Scalar>::infinity();
    bool singular = false;
};

/**
 * J_{n,xi}(u) = xi^d det( sum_i w_i (X_i - Xbar)(X_i - Xbar)^T ), the
 * determinant of the gradient of the smoothed quantile map. Evaluated in
 * log domain through the eigenvalues of the weighted covariance; a
 * non-positive eigenvalue reports J = 0 with the singular flag set.
 */
template <typename Scalar, typename Derived>
JacobianResult<Scalar> jacobian_det(const CenterOutwardFit<Scalar>& fit,
                                    const Eigen::MatrixBase<Derived>& u) {
    const Index d = fit.d();
    const VectorX<Scalar> w = softmax_log_weights(fit, u).array().exp();
    const RowVectorX<Scalar> mean = w.transpose() * fit.observations;
    const MatrixX<Scalar> centered = fit.observations.rowwise() - mean;
    const MatrixX<Scalar> cov =
        centered.transpose() * w.asDiagonal() * centered;  // d x d
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(cov);
    JacobianResult<Scalar> result;
    Scalar log_det = static_cast<Scalar>(d) * fit.xi_log;
    for (Index j = 0; j < d; ++j) {
        const Scalar ev = es.eigenvalues()(j);
        if (!(ev > 0)) {
            result.singular = true;
            return result;
        }
        log_det += std::log(ev);
    }
    result.log_value = log_det;
    result.value = std::exp(log_det);
    return result;
}

/// Jacobian values for a block of evaluation points; singular points map
/// to exact zero.
template <typename Scalar, typename Derived>
VectorX<Scalar> jacobian_batch(const CenterOutwardFit<Scalar>& fit,
                               const Eigen::MatrixBase<Derived>& eval_points) {
    const Index d = fit.d();
    const MatrixX<Scalar> W = softmax_weights_batch(fit, eval_points);
    VectorX<Scalar> values(eval_points.rows());
    MatrixX<Scalar> centered(fit.n(), d);
    for (Index r = 0; r < eval_points.rows(); ++r) {
        const RowVectorX<Scalar> mean = W.row(r) * fit.observations;
        centered = fit.observations.rowwise() - mean;
        const MatrixX<Scalar> cov =
            centered.transpose() * W.row(r).transpose().asDiagonal() * centered;
        Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(cov);
        Scalar log_det = static_cast<Scalar>(d) * fit.xi_log;
        bool singular = false;
        for (Index j = 0; j < d; ++j) {
            const Scalar ev = es.eigenvalues()(j);
            if (!(ev > 0)) {
                singular = true;
                break;
            }
            log_det += std::log(ev);
        }
        values(r) = singular ? Scalar(0) : std::exp(log_det);
    }
    return values;
}

// ---------------------------------------------------------------------------
// Contours and sign curves.

namespace detail {

template <typename Scalar>
MatrixX<Scalar> sphere_directions(Index d, Index n_points, std::uint64_t seed) {
    MatrixX<Scalar> dirs(n_points, d);
    if (d == 1) {
        for (Index j = 0; j < n_points; ++j) dirs(j, 0) = (j % 2 == 0) ? Scalar(1) : Scalar(-1);
        return dirs;
    }
    if (d == 2) {
        for (Index j = 0; j < n_points; ++j) {
            const Scalar a =
                Scalar(2.0 * std::numbers::pi) * static_cast<Scalar>(j) / static_cast<Scalar>(n_points);
            dirs(j, 0) = std::cos(a);
            dirs(j, 1) = std::sin(a);
        }
        return dirs;
    }
    Rng rng(seed);
    for (Index j = 0; j < n_points; ++j) {
        for (;;) {
            for (Index c = 0; c < d; ++c) dirs(j, c) = static_cast<Scalar>(rng.normal());
            const Scalar norm = dirs.row(j).norm();
            if (norm > 0) {
                dirs.row(j) /= norm;
                break;
            }
        }
    }
    return dirs;
}

}  // namespace detail

/**
 * Quantile contour of order p: the image under the smoothed quantile map of
 * the sphere of radius p, sampled at n_points directions (equiangular for
 * d = 2, random for d >= 3). One vertex per row.
 */
template <typename Scalar>
MatrixX<Scalar> quantile_contour(const CenterOutwardFit<Scalar>& fit, Scalar p, Index n_points,
                                 std::uint64_t direction_seed = 0) {
    if (!(p > 0 && p < 1))
        throw InvalidArgument("smooth_quantile", "contour order p must lie in (0, 1)");
    if (n_points < 1) throw InvalidArgument("smooth_quantile", "n_points must be >= 1");
    const MatrixX<Scalar> dirs = detail::sphere_directions<Scalar>(fit.d(), n_points, direction_seed);
    return smoothed_quantile_batch(fit, (p * dirs).eval());
}

/// Sign curve along unit direction s: Q_hat(c s) for c on a uniform [0,1) grid.
template <typename Scalar>
MatrixX<Scalar> sign_curve(const CenterOutwardFit<Scalar>& fit, VectorX<Scalar> direction,
                           Index n_points) {
    if (n_points < 1) throw InvalidArgument("smooth_quantile", "n_points must be >= 1");
    if (direction.size() != fit.d())
        throw InvalidArgument("smooth_quantile", "direction dimension mismatch");
    const Scalar norm = direction.norm();
    if (!(norm > 0)) throw InvalidArgument("smooth_quantile", "direction must be nonzero");
    direction /= norm;
    MatrixX<Scalar> eval(n_points, fit.d());
    for (Index t = 0; t < n_points; ++t)
        eval.row(t) = (static_cast<Scalar>(t) / static_cast<Scalar>(n_points)) * direction.transpose();
    return smoothed_quantile_batch(fit, eval);
}

}  // namespace otrisk
