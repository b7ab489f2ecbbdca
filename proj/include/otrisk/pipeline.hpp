#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "otrisk/grids.hpp"
#include "otrisk/smooth_quantile.hpp"
#include "otrisk/transport.hpp"

namespace otrisk {

enum class XiMode { Moderate, Sharp, Explicit };

template <typename Scalar = double>
struct FitOptions {
    Index m = 10;
    std::uint64_t seed = 0;
    std::optional<GridKind> grid_kind;  // default: RandomPolar2D for d == 2, RadialRank above
    XiMode xi_mode = XiMode::Moderate;
    Scalar xi_log = 0;  // used when xi_mode == Explicit
    int threads = 1;
};

template <typename Scalar = double>
Scalar resolve_xi_log(const FitOptions<Scalar>& options, Index n) {
    switch (options.xi_mode) {
        case XiMode::Moderate: return static_cast<Scalar>(moderate_xi_log(n));
        case XiMode::Sharp: return static_cast<Scalar>(sharp_xi_log);
        case XiMode::Explicit: return options.xi_log;
    }
    return options.xi_log;
}

namespace detail {

/// d = 1 analogue of the rank grid: signed radii rank/(n+1).
template <typename Scalar>
Grid<Scalar> make_sign_grid_1d(Index n, std::uint64_t seed) {
    Grid<Scalar> grid;
    grid.kind = GridKind::RadialRank;
    grid.seed = seed;
    grid.points.resize(n, 1);
    Rng rng(seed);
    VectorX<Scalar> z(n);
    for (Index i = 0; i < n; ++i) {
        Scalar g = static_cast<Scalar>(rng.normal());
        while (g == 0) g = static_cast<Scalar>(rng.normal());
        z(i) = g;
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(z(a)) < std::abs(z(b)); });
    for (Index pos = 0; pos < n; ++pos) {
        const Index i = order[static_cast<std::size_t>(pos)];
        grid.points(i, 0) = (z(i) > 0 ? Scalar(1) : Scalar(-1)) * static_cast<Scalar>(pos + 1) /
                            static_cast<Scalar>(n + 1);
    }
    return grid;
}

}  // namespace detail

/// One replication grid matched to the sample shape.
template <typename Scalar = double>
Grid<Scalar> make_grid_for(Index n, Index d, GridKind kind, std::uint64_t seed) {
    switch (kind) {
        case GridKind::RandomPolar2D:
            if (d != 2)
                throw InvalidArgument("grids", "RandomPolar2D grids exist only for d == 2");
            return make_polar_grid_2d<Scalar>(n, seed);
        case GridKind::RadialRank:
            if (d == 1) return detail::make_sign_grid_1d<Scalar>(n, seed);
            return make_radial_rank_grid<Scalar>(n, d, seed);
        case GridKind::Factorized:
            throw InvalidArgument("grids",
                                  "factorized grids need explicit (n_R, n_S, n0); build them "
                                  "with make_factorized_grid");
    }
    throw InvalidArgument("grids", "unknown grid kind");
}

/**
 * Full estimation pipeline: m replication grids, m optimal couplings,
 * averaged grid images, then the lambda/delta program on the averaged pairs.
 * Grid k draws from the stream derived from (seed, k), so the result is
 * independent of the thread count.
 */
template <typename Scalar = double>
CenterOutwardFit<Scalar> build_fit(const Sample<Scalar>& sample,
                                   const FitOptions<Scalar>& options = {}) {
    if (options.m < 1) throw InvalidArgument("transport", "m must be >= 1");
    const Index n = sample.n();
    const Index d = sample.d();
    const GridKind kind =
        options.grid_kind.value_or(d == 2 ? GridKind::RandomPolar2D : GridKind::RadialRank);

    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(options.m));
    std::vector<Grid<Scalar>> grids;
    grids.reserve(seeds.size());
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        seeds[k] = Rng::derive_seed(options.seed, k);
        grids.push_back(make_grid_for<Scalar>(n, d, kind, seeds[k]));
    }

    CenterOutwardFit<Scalar> fit;
    if (n == 1) {
        fit = make_fit<Scalar>(grids.front().points, sample.rows,
                               resolve_xi_log<Scalar>(options, n));
    } else {
        MatrixX<Scalar> averaged = average_couplings(sample, grids, options.threads);
        fit = make_fit<Scalar>(std::move(averaged), sample.rows,
                               resolve_xi_log<Scalar>(options, n));
    }
    fit.m = options.m;
    fit.grid_seeds = std::move(seeds);
    return fit;
}

}  // namespace otrisk
