#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "otrisk/common.hpp"
#include "otrisk/rng.hpp"

namespace otrisk {

enum class GridKind { Factorized, RandomPolar2D, RadialRank };

/**
 * A discrete approximation of the spherical uniform on the open unit ball:
 * n points, one per row. RandomPolar2D and RadialRank grids carry the exact
 * radius multiset {i/(n+1)}, so couplings against them have no radius ties.
 */
template <typename Scalar = double>
struct Grid {
    MatrixX<Scalar> points;  // n x d
    GridKind kind = GridKind::RandomPolar2D;
    std::uint64_t seed = 0;

    Index n() const { return points.rows(); }
    Index d() const { return points.cols(); }
};

namespace detail {

/// Uniform direction on the unit sphere via normalized Gaussian draw.
template <typename Scalar>
RowVectorX<Scalar> random_unit_direction(Rng& rng, Index d) {
    RowVectorX<Scalar> v(d);
    for (;;) {
        for (Index j = 0; j < d; ++j) v(j) = static_cast<Scalar>(rng.normal());
        const Scalar norm = v.norm();
        if (norm > 0) return v / norm;
    }
}

}  // namespace detail

/// w_i = (i/(n+1)) (cos phi_i, sin phi_i), phi i.i.d. uniform on [0, 2pi).
template <typename Scalar = double>
Grid<Scalar> make_polar_grid_2d(Index n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("grids", "make_polar_grid_2d needs n >= 1");
    Grid<Scalar> grid;
    grid.kind = GridKind::RandomPolar2D;
    grid.seed = seed;
    grid.points.resize(n, 2);
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        const Scalar phi = static_cast<Scalar>(2.0 * std::numbers::pi * rng.uniform());
        const Scalar r = static_cast<Scalar>(i + 1) / static_cast<Scalar>(n + 1);
        grid.points(i, 0) = r * std::cos(phi);
        grid.points(i, 1) = r * std::sin(phi);
    }
    return grid;
}

/**
 * Gaussian-rank grid for d >= 3: directions Z_i/|Z_i| with radius
 * rank(|Z_i|)/(n+1). The n+1 divisor keeps every point strictly inside the
 * ball; ties in |Z_i| break by index order.
 */
template <typename Scalar = double>
Grid<Scalar> make_radial_rank_grid(Index n, Index d, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("grids", "make_radial_rank_grid needs n >= 1");
    if (d < 2) throw InvalidArgument("grids", "make_radial_rank_grid needs d >= 2");
    Grid<Scalar> grid;
    grid.kind = GridKind::RadialRank;
    grid.seed = seed;
    grid.points.resize(n, d);
    Rng rng(seed);
    VectorX<Scalar> norms(n);
    for (Index i = 0; i < n; ++i) {
        RowVectorX<Scalar> z(d);
        for (Index j = 0; j < d; ++j) z(j) = static_cast<Scalar>(rng.normal());
        Scalar norm = z.norm();
        while (norm == 0) {
            for (Index j = 0; j < d; ++j) z(j) = static_cast<Scalar>(rng.normal());
            norm = z.norm();
        }
        grid.points.row(i) = z / norm;
        norms(i) = norm;
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return norms(a) < norms(b); });
    for (Index pos = 0; pos < n; ++pos) {
        const Scalar radius = static_cast<Scalar>(pos + 1) / static_cast<Scalar>(n + 1);
        grid.points.row(order[static_cast<std::size_t>(pos)]) *= radius;
    }
    return grid;
}

/**
 * Factorized grid: n_S random unit directions, each scaled to the n_R radii
 * {1/(n_R+1), ..., n_R/(n_R+1)}, plus n0 copies of the origin. Points are
 * laid out origin-first, then direction-major.
 */
template <typename Scalar = double>
Grid<Scalar> make_factorized_grid(Index n_R, Index n_S, Index n0, Index d, std::uint64_t seed) {
    if (n_R < 1 || n_S < 1)
        throw InvalidArgument("grids", "make_factorized_grid needs n_R >= 1 and n_S >= 1");
    if (d < 1) throw InvalidArgument("grids", "make_factorized_grid needs d >= 1");
    if (n0 < 0 || n0 >= std::min(n_R, n_S))
        throw InvalidArgument("grids", "make_factorized_grid needs 0 <= n0 < min(n_R, n_S)");
    Grid<Scalar> grid;
    grid.kind = GridKind::Factorized;
    grid.seed = seed;
    grid.points = MatrixX<Scalar>::Zero(n_R * n_S + n0, d);
    Rng rng(seed);
    Index row = n0;
    for (Index s = 0; s < n_S; ++s) {
        const RowVectorX<Scalar> direction = detail::random_unit_direction<Scalar>(rng, d);
        for (Index k = 1; k <= n_R; ++k) {
            const Scalar radius = static_cast<Scalar>(k) / static_cast<Scalar>(n_R + 1);
            grid.points.row(row++) = radius * direction;
        }
    }
    return grid;
}

}  // namespace otrisk
