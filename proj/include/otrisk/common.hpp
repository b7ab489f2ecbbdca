#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>

#include "otrisk/errors.hpp"

namespace otrisk {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/**
 * An n x d data matrix, one observation per row.
 */
template <typename Scalar = double>
struct Sample {
    MatrixX<Scalar> rows;

    Sample() = default;
    explicit Sample(MatrixX<Scalar> observations) : rows(std::move(observations)) {
        if (rows.rows() < 1 || rows.cols() < 1)
            throw InvalidArgument("sample", "sample needs n >= 1 and d >= 1");
        if (!rows.allFinite())
            throw InvalidData("sample", "sample contains non-finite entries");
    }

    Index n() const { return rows.rows(); }
    Index d() const { return rows.cols(); }
};

/// max-subtracted log(sum(exp(x_i))); tolerates -inf entries.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Scalar m = x.maxCoeff();
    if (!(m > -std::numeric_limits<Scalar>::infinity())) return m;
    return m + std::log((x.array() - m).exp().sum());
}

/// Compensated (Kahan) accumulator for long sums of products.
template <typename Scalar>
class KahanSum {
public:
    void add(Scalar value) {
        const Scalar y = value - compensation_;
        const Scalar t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    Scalar value() const { return sum_; }

private:
    Scalar sum_ = 0;
    Scalar compensation_ = 0;
};

template <typename Scalar>
Scalar squared_distance(const RowVectorX<Scalar>& a, const RowVectorX<Scalar>& b) {
    return (a - b).squaredNorm();
}

}  // namespace otrisk
