#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "otrisk/common.hpp"
#include "otrisk/rng.hpp"
#include "otrisk/special.hpp"

namespace otrisk {

enum class RadialFamily { GaussianChi, StudentT, Hyperbolic };

/**
 * Elliptical benchmark law: X = mu + Sigma^{1/2} Z with Z spherical. The
 * radial family fixes the law of |Z|: chi_d (Gaussian), the t_nu radial mix,
 * or the hyperbolic (gamma D)^{-1/2} chi mix with D ~ chi^2_{1/gamma}.
 */
template <typename Scalar = double>
struct EllipticalSpec {
    VectorX<Scalar> mu;
    MatrixX<Scalar> sigma;
    RadialFamily radial = RadialFamily::GaussianChi;
    Scalar nu = 3;         // StudentT degrees of freedom
    Scalar tail_gamma = Scalar(1) / 3;  // Hyperbolic extreme value index

    Index d() const { return sigma.rows(); }

    static EllipticalSpec gaussian(Index d) {
        return {VectorX<Scalar>::Zero(d), MatrixX<Scalar>::Identity(d, d),
                RadialFamily::GaussianChi, 0, 0};
    }
    static EllipticalSpec student_t(Index d, Scalar nu_, MatrixX<Scalar> sigma_) {
        return {VectorX<Scalar>::Zero(d), std::move(sigma_), RadialFamily::StudentT, nu_, 0};
    }
    static EllipticalSpec spherical_t(Index d, Scalar nu_) {
        return student_t(d, nu_, MatrixX<Scalar>::Identity(d, d));
    }
    static EllipticalSpec hyperbolic(Index d, Scalar gamma_, MatrixX<Scalar> sigma_) {
        return {VectorX<Scalar>::Zero(d), std::move(sigma_), RadialFamily::Hyperbolic, 0, gamma_};
    }
};

/// Correlation matrix with unit diagonal and constant off-diagonal entries.
template <typename Scalar = double>
MatrixX<Scalar> equicorrelation_matrix(Index d, Scalar off_diagonal = Scalar(0.5)) {
    MatrixX<Scalar> sigma = MatrixX<Scalar>::Constant(d, d, off_diagonal);
    sigma.diagonal().setOnes();
    return sigma;
}

namespace detail {

template <typename Derived>
Eigen::LLT<MatrixX<typename Derived::Scalar>> checked_cholesky(
    const Eigen::MatrixBase<Derived>& sigma) {
    using Scalar = typename Derived::Scalar;
    const MatrixX<Scalar> dense = sigma;
    if (dense.rows() != dense.cols() || !dense.isApprox(dense.transpose()))
        throw InvalidArgument("simulate", "sigma must be symmetric");
    Eigen::LLT<MatrixX<Scalar>> llt(dense);
    if (llt.info() != Eigen::Success)
        throw InvalidArgument("simulate", "sigma must be positive definite");
    return llt;
}

template <typename Scalar>
MatrixX<Scalar> gaussian_matrix(Rng& rng, Index n, Index d) {
    MatrixX<Scalar> Z(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) Z(i, j) = static_cast<Scalar>(rng.normal());
    return Z;
}

}  // namespace detail

template <typename Scalar = double>
Sample<Scalar> sample_gaussian(Index n, Index d, const EllipticalSpec<Scalar>& spec,
                               std::uint64_t seed) {
    if (spec.d() != d) throw InvalidArgument("simulate", "spec dimension mismatch");
    const auto llt = detail::checked_cholesky(spec.sigma);
    Rng rng(seed);
    MatrixX<Scalar> X = detail::gaussian_matrix<Scalar>(rng, n, d) * llt.matrixL().transpose();
    X.rowwise() += spec.mu.transpose();
    return Sample<Scalar>(std::move(X));
}

template <typename Scalar = double>
Sample<Scalar> sample_gaussian(Index n, Index d, std::uint64_t seed) {
    return sample_gaussian(n, d, EllipticalSpec<Scalar>::gaussian(d), seed);
}

/// Student-t via the Gaussian / chi-square mixture, one mixing draw per row.
template <typename Scalar = double, typename Derived>
Sample<Scalar> sample_student_t(Index n, Index d, Scalar nu,
                                const Eigen::MatrixBase<Derived>& sigma, std::uint64_t seed) {
    if (!(nu > 0)) throw InvalidArgument("simulate", "nu must be positive");
    const auto llt = detail::checked_cholesky(sigma);
    Rng rng(seed);
    MatrixX<Scalar> X(n, d);
    for (Index i = 0; i < n; ++i) {
        RowVectorX<Scalar> z(d);
        for (Index j = 0; j < d; ++j) z(j) = static_cast<Scalar>(rng.normal());
        const Scalar w = static_cast<Scalar>(rng.chi_square(static_cast<double>(nu)));
        X.row(i) = std::sqrt(nu / w) * z;
    }
    X = X * llt.matrixL().transpose();
    return Sample<Scalar>(std::move(X));
}

/**
 * Elliptical hyperbolic law: X = (gamma D)^{-1/2} Y with D ~ chi^2_{1/gamma}
 * independent of Y ~ N(0, sigma). Its extreme value index is gamma.
 */
template <typename Scalar = double, typename Derived>
Sample<Scalar> sample_hyperbolic(Index n, Index d, Scalar gamma_par,
                                 const Eigen::MatrixBase<Derived>& sigma, std::uint64_t seed) {
    if (!(gamma_par > 0)) throw InvalidArgument("simulate", "gamma must be positive");
    const auto llt = detail::checked_cholesky(sigma);
    Rng rng(seed);
    MatrixX<Scalar> X(n, d);
    for (Index i = 0; i < n; ++i) {
        RowVectorX<Scalar> y(d);
        for (Index j = 0; j < d; ++j) y(j) = static_cast<Scalar>(rng.normal());
        const Scalar D = static_cast<Scalar>(rng.chi_square(1.0 / static_cast<double>(gamma_par)));
        X.row(i) = y / std::sqrt(gamma_par * D);
    }
    X = X * llt.matrixL().transpose();
    return Sample<Scalar>(std::move(X));
}

template <typename Scalar = double>
Sample<Scalar> sample_hyperbolic(Index n, Index d, Scalar gamma_par, std::uint64_t seed) {
    return sample_hyperbolic<Scalar>(n, d, gamma_par, equicorrelation_matrix<Scalar>(d), seed);
}

/**
 * Radial quantile by Monte Carlo tabulation: the quantile function of |Z|
 * for the spherical member of the family, inverted by monotone linear
 * interpolation of a large sorted draw. Used for the families without an
 * analytic radial quantile.
 */
template <typename Scalar = double>
class RadialQuantileTable {
public:
    RadialQuantileTable(const EllipticalSpec<Scalar>& spec, std::uint64_t seed,
                        Index n_samples = 1000000) {
        radii_.resize(static_cast<std::size_t>(n_samples));
        Rng rng(seed, /*stream=*/0x7ab1e);
        const Index d = spec.d();
        for (auto& r : radii_) {
            Scalar q2 = 0;
            for (Index j = 0; j < d; ++j) {
                const Scalar g = static_cast<Scalar>(rng.normal());
                q2 += g * g;
            }
            switch (spec.radial) {
                case RadialFamily::GaussianChi:
                    r = std::sqrt(q2);
                    break;
                case RadialFamily::StudentT: {
                    const Scalar w =
                        static_cast<Scalar>(rng.chi_square(static_cast<double>(spec.nu)));
                    r = std::sqrt(q2 * spec.nu / w);
                    break;
                }
                case RadialFamily::Hyperbolic: {
                    const Scalar D = static_cast<Scalar>(
                        rng.chi_square(1.0 / static_cast<double>(spec.tail_gamma)));
                    r = std::sqrt(q2 / (spec.tail_gamma * D));
                    break;
                }
            }
        }
        std::sort(radii_.begin(), radii_.end());
    }

    Scalar quantile(Scalar p) const {
        if (!(p > 0 && p < 1))
            throw InvalidArgument("simulate", "radial quantile needs p in (0, 1)");
        const auto size = static_cast<Scalar>(radii_.size());
        const Scalar pos = p * (size - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, radii_.size() - 1);
        const Scalar frac = pos - static_cast<Scalar>(lo);
        return radii_[lo] + frac * (radii_[hi] - radii_[lo]);
    }

private:
    std::vector<Scalar> radii_;
};

/// Radial quantile Q_R(p); analytic for the Gaussian family, table otherwise.
template <typename Scalar = double>
Scalar radial_quantile(const EllipticalSpec<Scalar>& spec, Scalar p,
                       const RadialQuantileTable<Scalar>* table = nullptr) {
    if (spec.radial == RadialFamily::GaussianChi)
        return std::sqrt(static_cast<Scalar>(
            chi_square_quantile(static_cast<double>(p), static_cast<double>(spec.d()))));
    if (table == nullptr)
        throw InvalidArgument("simulate",
                              "radial quantile for this family needs a RadialQuantileTable");
    return table->quantile(p);
}

/**
 * Center-outward quantile of the elliptical law,
 *   Q(u) = mu + Sigma^{1/2} (u/|u|) Q_R(|u|),
 * with the symmetric square root of Sigma (a gradient map must be symmetric).
 */
template <typename Scalar = double>
VectorX<Scalar> true_elliptical_quantile(const VectorX<Scalar>& u,
                                         const EllipticalSpec<Scalar>& spec,
                                         const RadialQuantileTable<Scalar>* table = nullptr) {
    const Scalar norm = u.norm();
    if (!(norm > 0 && norm < 1))
        throw InvalidArgument("simulate", "true_elliptical_quantile needs 0 < |u| < 1");
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(spec.sigma);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
        throw InvalidArgument("simulate", "sigma must be positive definite");
    const MatrixX<Scalar> sqrt_sigma = es.operatorSqrt();
    return spec.mu + sqrt_sigma * (u / norm) * radial_quantile(spec, norm, table);
}

/**
 * Population draw of Y = <U, Q(U)> with U spherical uniform. This is the
 * law the potential observables converge to; used as the reference sample
 * in distribution-distance checks.
 */
template <typename Scalar = double>
VectorX<Scalar> sample_population_y(const EllipticalSpec<Scalar>& spec, Index n,
                                    std::uint64_t seed,
                                    const RadialQuantileTable<Scalar>* table = nullptr) {
    Rng rng(seed, /*stream=*/0x9);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(spec.sigma);
    const MatrixX<Scalar> sqrt_sigma = es.operatorSqrt();
    const Index d = spec.d();
    VectorX<Scalar> y(n);
    for (Index i = 0; i < n; ++i) {
        VectorX<Scalar> s(d);
        for (;;) {
            for (Index j = 0; j < d; ++j) s(j) = static_cast<Scalar>(rng.normal());
            const Scalar norm = s.norm();
            if (norm > 0) {
                s /= norm;
                break;
            }
        }
        Scalar r = static_cast<Scalar>(rng.uniform());
        while (r == 0) r = static_cast<Scalar>(rng.uniform());
        const Scalar qr = radial_quantile(spec, r, table);
        y(i) = (r * s).dot(spec.mu + sqrt_sigma * s * qr);
    }
    return y;
}

}  // namespace otrisk
