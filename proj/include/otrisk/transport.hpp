#pragma once

#include <algorithm>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <vector>

#include "otrisk/common.hpp"
#include "otrisk/grids.hpp"
#include "otrisk/rng.hpp"

namespace otrisk {

/**
 * Optimal bijection between sample rows and grid rows under squared
 * Euclidean cost. assignment[i] is the grid index matched to observation i.
 */
template <typename Scalar = double>
struct Coupling {
    std::vector<Index> assignment;
    Scalar total_cost = 0;
};

namespace detail {

/// Dense squared-distance cost matrix, C(i, k) = |X_i - u_k|^2.
template <typename Scalar>
MatrixX<Scalar> squared_cost_matrix(const MatrixX<Scalar>& X, const MatrixX<Scalar>& U) {
    const VectorX<Scalar> x2 = X.rowwise().squaredNorm();
    const VectorX<Scalar> u2 = U.rowwise().squaredNorm();
    MatrixX<Scalar> C = -2 * X * U.transpose();
    C.colwise() += x2;
    C.rowwise() += u2.transpose();
    // Squared distances cannot be negative; clamp the GEMM rounding noise.
    return C.cwiseMax(Scalar(0));
}

/**
 * Shortest-augmenting-path solver for the dense linear assignment problem
 * (Jonker-Volgenant family). One Dijkstra-like scan per row over reduced
 * costs, maintaining dual feasibility throughout, so the final matching is
 * globally optimal. O(n^3) worst case.
 */
template <typename Scalar>
std::vector<Index> solve_lap(const MatrixX<Scalar>& cost) {
    const Index n = cost.rows();
    const Scalar inf = std::numeric_limits<Scalar>::infinity();

    VectorX<Scalar> u = VectorX<Scalar>::Zero(n);  // row duals
    VectorX<Scalar> v = VectorX<Scalar>::Zero(n);  // column duals
    std::vector<Index> col4row(static_cast<std::size_t>(n), -1);
    std::vector<Index> row4col(static_cast<std::size_t>(n), -1);

    std::vector<Index> path(static_cast<std::size_t>(n), -1);
    std::vector<Index> remaining(static_cast<std::size_t>(n));
    std::vector<bool> scanned_rows(static_cast<std::size_t>(n));
    std::vector<bool> scanned_cols(static_cast<std::size_t>(n));
    VectorX<Scalar> shortest(n);

    for (Index cur_row = 0; cur_row < n; ++cur_row) {
        std::fill(scanned_rows.begin(), scanned_rows.end(), false);
        std::fill(scanned_cols.begin(), scanned_cols.end(), false);
        shortest.setConstant(inf);
        std::iota(remaining.begin(), remaining.end(), Index{0});
        Index num_remaining = n;

        Scalar min_val = 0;
        Index i = cur_row;
        Index sink = -1;
        while (sink == -1) {
            scanned_rows[static_cast<std::size_t>(i)] = true;
            Index best_it = -1;
            Scalar lowest = inf;
            for (Index it = 0; it < num_remaining; ++it) {
                const Index j = remaining[static_cast<std::size_t>(it)];
                const Scalar r = min_val + cost(i, j) - u(i) - v(j);
                if (r < shortest(j)) {
                    path[static_cast<std::size_t>(j)] = i;
                    shortest(j) = r;
                }
                if (shortest(j) < lowest ||
                    (shortest(j) == lowest && row4col[static_cast<std::size_t>(j)] == -1)) {
                    lowest = shortest(j);
                    best_it = it;
                }
            }
            min_val = lowest;
            if (!(min_val < inf))
                throw InvalidData("transport", "assignment became infeasible (non-finite costs)");
            const Index j = remaining[static_cast<std::size_t>(best_it)];
            if (row4col[static_cast<std::size_t>(j)] == -1)
                sink = j;
            else
                i = row4col[static_cast<std::size_t>(j)];
            scanned_cols[static_cast<std::size_t>(j)] = true;
            remaining[static_cast<std::size_t>(best_it)] = remaining[static_cast<std::size_t>(--num_remaining)];
        }

        u(cur_row) += min_val;
        for (Index k = 0; k < n; ++k) {
            if (scanned_rows[static_cast<std::size_t>(k)] && k != cur_row)
                u(k) += min_val - shortest(col4row[static_cast<std::size_t>(k)]);
        }
        for (Index j = 0; j < n; ++j) {
            if (scanned_cols[static_cast<std::size_t>(j)]) v(j) -= min_val - shortest(j);
        }

        Index j = sink;
        for (;;) {
            const Index pi = path[static_cast<std::size_t>(j)];
            row4col[static_cast<std::size_t>(j)] = pi;
            std::swap(col4row[static_cast<std::size_t>(pi)], j);
            if (pi == cur_row) break;
        }
    }
    return col4row;
}

}  // namespace detail

/// Sum of squared distances under a given assignment, compensated summation.
template <typename Scalar = double>
Scalar coupling_cost(const Sample<Scalar>& sample, const Grid<Scalar>& grid,
                     const std::vector<Index>& sigma) {
    if (sample.n() != grid.n() || sample.d() != grid.d())
        throw InvalidArgument("transport", "sample and grid sizes do not match");
    if (static_cast<Index>(sigma.size()) != sample.n())
        throw InvalidArgument("transport", "assignment length does not match sample size");
    KahanSum<Scalar> acc;
    for (Index i = 0; i < sample.n(); ++i) {
        const Index k = sigma[static_cast<std::size_t>(i)];
        if (k < 0 || k >= grid.n())
            throw InvalidArgument("transport", "assignment index out of range");
        acc.add((sample.rows.row(i) - grid.points.row(k)).squaredNorm());
    }
    return acc.value();
}

/// Globally optimal coupling between sample and grid (squared cost).
template <typename Scalar = double>
Coupling<Scalar> solve_assignment(const Sample<Scalar>& sample, const Grid<Scalar>& grid) {
    if (sample.n() != grid.n() || sample.d() != grid.d())
        throw InvalidArgument("transport", "sample and grid sizes do not match");
    const MatrixX<Scalar> cost = detail::squared_cost_matrix(sample.rows, grid.points);
    if (!cost.allFinite()) throw InvalidData("transport", "non-finite assignment costs");
    Coupling<Scalar> coupling;
    coupling.assignment = detail::solve_lap(cost);
    coupling.total_cost = coupling_cost(sample, grid, coupling.assignment);
    return coupling;
}

/**
 * Cyclical monotonicity check on paired points (y_i, x_i): every directed
 * cycle i1 -> ... -> ik must satisfy
 *   <y_{i1}, x_{i2} - x_{i1}> + ... + <y_{ik}, x_{i1} - x_{ik}> <= tol.
 *
 * Exhaustive over all cycles of length 2..max_cycle_len while the cycle
 * count stays below 1e6, otherwise 1e5 sampled cycles.
 */
template <typename Scalar = double>
bool check_cyclical_monotonicity(const MatrixX<Scalar>& Y, const MatrixX<Scalar>& X,
                                 Index max_cycle_len, Scalar tol = Scalar(1e-9),
                                 std::uint64_t sample_seed = 0) {
    if (Y.rows() != X.rows() || Y.cols() != X.cols())
        throw InvalidArgument("transport", "paired point sets must have equal shape");
    if (max_cycle_len < 2)
        throw InvalidArgument("transport", "max_cycle_len must be at least 2");
    const Index n = Y.rows();
    if (n < 2) return true;
    const Index L = std::min(max_cycle_len, n);

    // <y_i, x_j> table; a cycle sum telescopes to sum of G(i, next) - G(i, i).
    const MatrixX<Scalar> G = Y * X.transpose();

    const auto cycle_sum = [&](const std::vector<Index>& cyc) {
        Scalar s = 0;
        const std::size_t k = cyc.size();
        for (std::size_t t = 0; t < k; ++t) {
            const Index i = cyc[t];
            const Index j = cyc[(t + 1) % k];
            s += G(i, j) - G(i, i);
        }
        return s;
    };

    // Number of distinct directed cycles: sum_k C(n,k) (k-1)!.
    double total_cycles = 0;
    for (Index k = 2; k <= L && total_cycles <= 1e6; ++k) {
        double c = 1;
        for (Index t = 0; t < k; ++t) c *= static_cast<double>(n - t) / static_cast<double>(t + 1);
        for (Index t = 2; t < k; ++t) c *= static_cast<double>(t);
        total_cycles += c;
    }

    if (total_cycles <= 1e6) {
        // Enumerate: pick the smallest index first so each cycle appears once
        // per direction.
        std::vector<Index> cyc;
        std::vector<Index> pool;
        bool ok = true;
        const std::function<void(std::size_t)> extend = [&](std::size_t depth) {
            if (!ok) return;
            if (cyc.size() >= 2 && cycle_sum(cyc) > tol) {
                ok = false;
                return;
            }
            if (static_cast<Index>(cyc.size()) == L) return;
            for (std::size_t p = depth; p < pool.size(); ++p) {
                std::swap(pool[depth], pool[p]);
                cyc.push_back(pool[depth]);
                extend(depth + 1);
                cyc.pop_back();
                std::swap(pool[depth], pool[p]);
                if (!ok) return;
            }
        };
        for (Index first = 0; first + 1 < n && ok; ++first) {
            cyc.assign(1, first);
            pool.clear();
            for (Index j = first + 1; j < n; ++j) pool.push_back(j);
            extend(0);
        }
        return ok;
    }

    Rng rng(sample_seed);
    std::vector<Index> cyc;
    for (int trial = 0; trial < 100000; ++trial) {
        const Index k = 2 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(L - 1));
        cyc.clear();
        while (static_cast<Index>(cyc.size()) < k) {
            const Index cand = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
            if (std::find(cyc.begin(), cyc.end(), cand) == cyc.end()) cyc.push_back(cand);
        }
        if (cycle_sum(cyc) > tol) return false;
    }
    return true;
}

/// Convenience overload for coupling output: pairs (u_sigma(i), X_i).
template <typename Scalar = double>
bool check_cyclical_monotonicity(const Sample<Scalar>& sample, const Grid<Scalar>& grid,
                                 const std::vector<Index>& sigma, Index max_cycle_len,
                                 Scalar tol = Scalar(1e-9)) {
    MatrixX<Scalar> Y(sample.n(), sample.d());
    for (Index i = 0; i < sample.n(); ++i)
        Y.row(i) = grid.points.row(sigma[static_cast<std::size_t>(i)]);
    return check_cyclical_monotonicity<Scalar>(Y, sample.rows, max_cycle_len, tol);
}

/**
 * Average of the grid images over m independent couplings,
 *   F_bar(X_i) = (1/m) sum_k u_{sigma_k(i)}.
 * Grids solve independently (optionally in parallel); the average is merged
 * in grid order either way, so the result does not depend on thread count.
 */
template <typename Scalar = double>
MatrixX<Scalar> average_couplings(const Sample<Scalar>& sample,
                                  const std::vector<Grid<Scalar>>& grids, int threads = 1) {
    if (grids.empty()) throw InvalidArgument("transport", "average_couplings needs m >= 1 grids");
    for (const auto& grid : grids) {
        if (grid.n() != sample.n() || grid.d() != sample.d())
            throw InvalidArgument("transport", "all grids must match the sample size/dimension");
    }
    const std::size_t m = grids.size();
    std::vector<std::vector<Index>> assignments(m);
    if (threads > 1 && m > 1) {
        std::vector<std::future<std::vector<Index>>> jobs;
        jobs.reserve(m);
        for (std::size_t k = 0; k < m; ++k)
            jobs.push_back(std::async(std::launch::async, [&, k] {
                return solve_assignment(sample, grids[k]).assignment;
            }));
        for (std::size_t k = 0; k < m; ++k) assignments[k] = jobs[k].get();
    } else {
        for (std::size_t k = 0; k < m; ++k)
            assignments[k] = solve_assignment(sample, grids[k]).assignment;
    }
    MatrixX<Scalar> avg = MatrixX<Scalar>::Zero(sample.n(), sample.d());
    for (std::size_t k = 0; k < m; ++k) {
        for (Index i = 0; i < sample.n(); ++i)
            avg.row(i) += grids[k].points.row(assignments[k][static_cast<std::size_t>(i)]);
    }
    return avg / static_cast<Scalar>(m);
}

}  // namespace otrisk
