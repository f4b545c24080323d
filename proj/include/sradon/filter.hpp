#pragma once

#include <span>
#include <vector>

#include "sradon/core.hpp"
#include "sradon/forward.hpp"

namespace sradon {

namespace detail {

//! Coefficients a_j of D^k h = sum_j a_j r^(j - 2k) h^(j), D = (1/2r) d/dr.
inline std::vector<double> d_power_coefficients(int k) {
    std::vector<double> a(static_cast<std::size_t>(k + 1), 0.0);
    a[0] = 1.0;
    for (int level = 0; level < k; ++level) {
        std::vector<double> next(a.size(), 0.0);
        for (int j = 0; j <= level; ++j) {
            double const c = a[static_cast<std::size_t>(j)];
            if (c == 0) continue;
            // D[r^m h^(j)] = (m/2) r^(m-2) h^(j) + (1/2) r^(m-1) h^(j+1), m = j - 2 level
            next[static_cast<std::size_t>(j)] += c * 0.5 * (j - 2 * level);
            next[static_cast<std::size_t>(j + 1)] += c * 0.5;
        }
        a = std::move(next);
    }
    return a;
}

//! Fourth-order accurate j-th derivative on a uniform grid.
inline std::vector<double> derivative4(std::span<double const> f, double h, int order) {
    auto const n = static_cast<std::ptrdiff_t>(f.size());
    int const central = 2 * ((order + 1) / 2) + 3;
    int const sided = order + 4;
    std::ptrdiff_t const half = central / 2;

    auto weights_for = [&](std::ptrdiff_t first, int size, std::ptrdiff_t at) {
        std::vector<double> offsets(static_cast<std::size_t>(size));
        for (int s = 0; s < size; ++s) offsets[static_cast<std::size_t>(s)] = static_cast<double>(first + s);
        return fd_weights(static_cast<double>(at), offsets, order);
    };
    std::vector<double> const wc = weights_for(-half, central, 0);
    double const scale = std::pow(h, -order);

    std::vector<double> out(f.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0;
        if (i - half >= 0 && i + half < n) {
            for (int s = 0; s < central; ++s) acc += wc[static_cast<std::size_t>(s)] * f[static_cast<std::size_t>(i - half + s)];
        } else {
            std::ptrdiff_t const first = std::clamp<std::ptrdiff_t>(i - sided / 2, 0, n - sided);
            auto const w = weights_for(first, sided, i);
            for (int s = 0; s < sided; ++s) acc += w[static_cast<std::size_t>(s)] * f[static_cast<std::size_t>(first + s)];
        }
        out[static_cast<std::size_t>(i)] = acc * scale;
    }
    return out;
}

}  // namespace detail

/*!
 * Samples of D^k h where D = (1/2r) d/dr.
 *
 * D^k is expanded into r-weighted derivatives of order 1..k, each taken with
 * a fourth-order stencil (one-sided near the ends). The stencil half-width is
 * at most 3 for k <= 4, so compact support grows by at most 3 h_r.
 */
inline std::vector<double> apply_D(std::span<double const> values, UniformGrid const& grid, int k) {
    if (k < 0) throw ArgumentError("derivative order must be non-negative");
    if (values.size() != grid.count) throw ArgumentError("sample count does not match grid");
    if (k == 0) return {values.begin(), values.end()};
    if (values.size() < static_cast<std::size_t>(2 * k + 3))
        throw ArgumentError("apply_D needs at least 2k+3 samples");
    if (!(grid.step > 0)) throw ArgumentError("grid step must be positive");

    auto const coeff = detail::d_power_coefficients(k);
    std::vector<double> out(values.size(), 0.0);
    for (int j = 1; j <= k; ++j) {
        double const c = coeff[static_cast<std::size_t>(j)];
        if (c == 0) continue;
        auto const deriv = detail::derivative4(values, grid.step, j);
        for (std::size_t i = 0; i < out.size(); ++i) {
            double const r = grid[i];
            if (r == 0) throw DomainError("apply_D grid touches r = 0");
            out[i] += c * std::pow(r, j - 2 * k) * deriv[i];
        }
    }
    return out;
}

struct FilteredColumn {
    std::vector<double> values;
    bool even = false;
    int derivative_order = 0;
};

//! D^{n-1}[r^{-1} g] on the sample grid, odd n.
inline FilteredColumn filter_column_odd(std::span<double const> column, UniformGrid const& grid, int n) {
    if (n < 1 || n % 2 == 0) throw ArgumentError("filter_column_odd needs odd n");
    std::vector<double> scaled(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (grid[i] == 0) throw DomainError("radius grid touches r = 0");
        scaled[i] = column[i] / grid[i];
    }
    return {apply_D(scaled, grid, n - 1), false, n - 1};
}

/*!
 * PV int D^{n-1}[tau^{-1} g(tau)] tau / (rho^2 - tau^2) dtau, even n.
 *
 * Midpoint rule on the tau grid. With rho midway between two nodes the
 * nodes on either side of the pole cancel symmetrically, which realizes the
 * principal value.
 */
inline FilteredColumn filter_column_even_pv(std::span<double const> column, UniformGrid const& tau, int n,
                                            std::span<double const> query) {
    if (n < 2 || n % 2 == 1) throw ArgumentError("filter_column_even_pv needs even n");
    if (column.size() != tau.count) throw ArgumentError("sample count does not match grid");
    double const h = tau.step;
    double const limit = tau.back() + h;
    for (double rho : query) {
        if (rho > limit) throw ExtrapolationError("query radius beyond r_max + h_r");
        double const pos = (rho - tau.start) / h;
        if (std::abs(pos - std::round(pos)) < 1e-9 && pos > -0.5 && pos < static_cast<double>(tau.count) - 0.5)
            throw SingularNode("query radius coincides with a tau node");
    }
    std::vector<double> scaled(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (tau[i] == 0) throw DomainError("radius grid touches r = 0");
        scaled[i] = column[i] / tau[i];
    }
    auto const q = apply_D(scaled, tau, n - 1);
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] != 0) support.push_back(i);

    FilteredColumn out{std::vector<double>(query.size(), 0.0), true, n - 1};
    for (std::size_t j = 0; j < query.size(); ++j) {
        double const rho2 = query[j] * query[j];
        double acc = 0;
        for (std::size_t i : support) {
            double const t = tau[i];
            acc += q[i] * t / (rho2 - t * t);
        }
        out.values[j] = acc * h;
    }
    return out;
}

//! Query grid for the even filter: midpoints h/2 + j h, j = 0 .. count.
inline UniformGrid staggered_grid(UniformGrid const& tau) {
    return {tau.start - 0.5 * tau.step, tau.step, tau.count + 1};
}

//! Constant c with P(g) = c * (filter output), per parity.
inline double filter_prefactor(int n) {
    if (n % 2 == 1) return std::numbers::pi * ((n - 1) / 2 % 2 == 0 ? 1.0 : -1.0);
    return 2.0 * ((n - 2) / 2 % 2 == 0 ? 1.0 : -1.0);
}

struct FilterOptions {
    unsigned workers = 1;
};

//! Column-wise filter; the result's radius grid is the query grid.
template<int N>
Sinogram<N> filter_sinogram(Sinogram<N> const& sino, FilterOptions const& opts = {}) {
    if (sino.filter) throw ArgumentError("sinogram is already filtered");
    constexpr bool even = N % 2 == 0;
    Sinogram<N> out{sino.surface, sino.patch, sino.resolution, sino.centers, {}, {}, sino.metadata, {}};
    out.radii = even ? staggered_grid(sino.radii) : sino.radii;
    out.filter = FilterInfo{N, even, filter_prefactor(N)};
    out.data.assign(out.centers.size() * out.radii.count, 0.0);

    std::vector<double> query;
    if constexpr (even) {
        query.resize(out.radii.count);
        for (std::size_t j = 0; j < query.size(); ++j) query[j] = out.radii[j];
    }
    parallel_for(sino.centers.size(), opts.workers, [&](std::size_t c) {
        auto const col = sino.column(c);
        FilteredColumn f = even ? filter_column_even_pv(col, sino.radii, N, query)
                                : filter_column_odd(col, sino.radii, N);
        std::copy(f.values.begin(), f.values.end(), out.column(c).begin());
    });
    return out;
}

}  // namespace sradon
