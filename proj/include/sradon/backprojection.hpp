#pragma once

#include <span>
#include <vector>

#include "sradon/core.hpp"
#include "sradon/filter.hpp"
#include "sradon/forward.hpp"
#include "sradon/geometry.hpp"
#include "sradon/image.hpp"
#include "sradon/phantom.hpp"

namespace sradon {

//---------------------------------------------------------------------------//
// Normalization table. Everything that multiplies the back-projection sum
// lives here:
//
//   T = b_constant * prefactor * sum_z w_z <z - x, nu_z> F(z, |x - z|)
//
// where F is the stored filter output and prefactor = filter_prefactor(n):
//
//   convex, odd n :  (-1)^((n-1)/2) / (2 pi^(n-1))
//   convex, even n:  (-1)^((n-2)/2) / pi^n
//   plane,  odd n :  (-1)^((n-1)/2) / pi^(n-1)       (weight x_n)
//   plane,  even n:  2 (-1)^((n-2)/2) / pi^n         (weight x_n)
//---------------------------------------------------------------------------//

//! Constant of the back-projection operator B; doubled for the plane.
inline double b_constant(SurfaceKind kind, int n) {
    double const base = 1.0 / (2.0 * std::pow(std::numbers::pi, n));
    return kind == SurfaceKind::Hyperplane ? 2.0 * base : base;
}

inline double pipeline_constant(SurfaceKind kind, int n) {
    return b_constant(kind, n) * filter_prefactor(n);
}

//---------------------------------------------------------------------------//
// Radial interpolation
//---------------------------------------------------------------------------//
enum class RadialLookup { Interior, Edge, OutOfRange };

/*!
 * Value of a column sampled on \c grid at radius r.
 *
 * Four-point Lagrange cubic in the interior (exact for cubics), linear in the
 * first and last interval and up to one step past either end.
 */
inline double interpolate_radial(std::span<double const> col, UniformGrid const& grid, double r,
                                 RadialLookup* status = nullptr) {
    auto const n = static_cast<std::ptrdiff_t>(col.size());
    double const t = (r - grid.start) / grid.step;
    auto set = [&](RadialLookup s) {
        if (status) *status = s;
    };
    if (!(t >= -1.0) || !(t <= static_cast<double>(n))) {
        set(RadialLookup::OutOfRange);
        return 0.0;
    }
    auto j = static_cast<std::ptrdiff_t>(std::floor(t));
    if (j >= 1 && j + 2 <= n - 1) {
        double const u = t - static_cast<double>(j);
        auto at = [&](std::ptrdiff_t k) { return col[static_cast<std::size_t>(k)]; };
        double const um1 = u + 1, u1 = u - 1, u2 = u - 2;
        double const w0 = -u * u1 * u2 / 6.0;
        double const w1 = um1 * u1 * u2 / 2.0;
        double const w2 = -um1 * u * u2 / 2.0;
        double const w3 = um1 * u * u1 / 6.0;
        set(RadialLookup::Interior);
        return w0 * at(j - 1) + w1 * at(j) + w2 * at(j + 1) + w3 * at(j + 2);
    }
    if (n < 2) {
        set(RadialLookup::Edge);
        return col.empty() ? 0.0 : col[0];
    }
    j = std::clamp<std::ptrdiff_t>(j, 0, n - 2);
    double const u = t - static_cast<double>(j);
    set(RadialLookup::Edge);
    return (1 - u) * col[static_cast<std::size_t>(j)] + u * col[static_cast<std::size_t>(j + 1)];
}

//---------------------------------------------------------------------------//
// Back-projection
//---------------------------------------------------------------------------//
struct BackprojectOptions {
    unsigned workers = 1;
    //! Fraction of out-of-range radius lookups that triggers a hard failure.
    double max_out_of_range = 1e-3;
};

struct BackprojectStats {
    std::size_t samples = 0;
    std::size_t out_of_range = 0;
};

template<int N>
ImageGrid<N> backproject(Sinogram<N> const& filtered, GridSpec<N> const& grid,
                         BackprojectOptions const& opts = {}, BackprojectStats* stats = nullptr) {
    if (!filtered.filter) throw ArgumentError("backproject expects a filtered sinogram");
    auto const& surface = filtered.surface;
    ImageGrid<N> img(grid);
    for (std::size_t i = 0; i < img.size(); ++i)
        if (!contains(surface, grid.cell_center(i))) throw DomainError("image grid leaves Omega");

    bool const plane = surface.is_plane();
    std::vector<Vec<N>> normals;
    normals.reserve(filtered.centers.size());
    for (auto const& c : filtered.centers) normals.push_back(outward_normal(surface, c.point));

    std::vector<std::size_t> missing(img.size(), 0);
    parallel_for(img.size(), opts.workers, [&](std::size_t cell) {
        Vec<N> const x = grid.cell_center(cell);
        double acc = 0;
        std::size_t miss = 0;
        for (std::size_t j = 0; j < filtered.centers.size(); ++j) {
            auto const& c = filtered.centers[j];
            Vec<N> const d = c.point - x;
            double const weight = plane ? x[N - 1] : dot(d, normals[j]);
            RadialLookup status{};
            double const v = interpolate_radial(filtered.column(j), filtered.radii, norm(d), &status);
            if (status == RadialLookup::OutOfRange) {
                ++miss;
                continue;
            }
            acc += c.weight * weight * v;
        }
        img[cell] = acc;
        missing[cell] = miss;
    });

    BackprojectStats st;
    st.samples = img.size() * filtered.centers.size();
    for (auto m : missing) st.out_of_range += m;
    if (stats) *stats = st;
    if (st.samples > 0 && static_cast<double>(st.out_of_range) > opts.max_out_of_range * static_cast<double>(st.samples))
        throw CoverageError("back-projection radii exceed the filtered range for "
                            + std::to_string(st.out_of_range) + " of " + std::to_string(st.samples) + " samples");

    double const scale = b_constant(surface.kind(), N) * filtered.filter->prefactor;
    for (double& v : img.values) v *= scale;
    img.provenance["surface"] = to_string(surface.kind());
    img.provenance["constant"] = scale;
    img.provenance["out_of_range"] = st.out_of_range;
    return img;
}

struct ReconstructOptions {
    unsigned workers = 1;
    double max_out_of_range = 1e-3;
};

//! T = B P R on a convex (or almost-enclosing) surface.
template<int N>
ImageGrid<N> reconstruct_full(Sinogram<N> const& sino, GridSpec<N> const& grid,
                              ReconstructOptions const& opts = {}, BackprojectStats* stats = nullptr) {
    auto const filtered = filter_sinogram(sino, {opts.workers});
    auto img = backproject(filtered, grid, {opts.workers, opts.max_out_of_range}, stats);
    img.provenance["pipeline"] = "full";
    return img;
}

//! T = (x_n / pi^n) R* P R on the hyperplane.
template<int N>
ImageGrid<N> reconstruct_plane(Sinogram<N> const& sino, GridSpec<N> const& grid,
                               ReconstructOptions const& opts = {}, BackprojectStats* stats = nullptr) {
    if (!sino.surface.is_plane()) throw ArgumentError("reconstruct_plane needs a hyperplane sinogram");
    auto const filtered = filter_sinogram(sino, {opts.workers});
    auto img = backproject(filtered, grid, {opts.workers, opts.max_out_of_range}, stats);
    img.provenance["pipeline"] = "plane";
    return img;
}

template<int N>
ImageGrid<N> reconstruct(Sinogram<N> const& sino, GridSpec<N> const& grid,
                         ReconstructOptions const& opts = {}, BackprojectStats* stats = nullptr) {
    return sino.surface.is_plane() ? reconstruct_plane(sino, grid, opts, stats)
                                   : reconstruct_full(sino, grid, opts, stats);
}

//---------------------------------------------------------------------------//
// Default image box
//---------------------------------------------------------------------------//
/*!
 * Bounded Omega: concentric cube at 70% of the inradius (shrunk by sqrt(2/n)
 * in n > 2 so the corners stay inside). Unbounded Omega: cube around the
 * phantom support, 1.5x its half-extent.
 */
template<int N>
GridSpec<N> auto_box(Surface<N> const& s, std::size_t size, Phantom<N> const* phantom = nullptr) {
    if (s.bounded()) {
        double inradius = std::numeric_limits<double>::infinity();
        for (double w : s.omega()) inradius = std::min(inradius, 1.0 / w);
        double const half = 0.7 * inradius * std::min(1.0, std::sqrt(2.0 / N));
        return GridSpec<N>::cube(Vec<N>{}, half, size);
    }
    if (!phantom || phantom->terms.empty())
        throw ArgumentError("auto box on an unbounded surface needs the phantom support");
    auto const [lo, hi] = phantom->support_box();
    Vec<N> const mid = 0.5 * (lo + hi);
    double ext = 0;
    for (int i = 0; i < N; ++i) ext = std::max(ext, 0.5 * (hi[i] - lo[i]));
    auto g = GridSpec<N>::cube(mid, 1.5 * ext, size);
    if (s.is_plane() && g.lo[N - 1] <= 0) {
        g.lo[N - 1] = 0.5 * lo[N - 1];
        if (!(g.lo[N - 1] > 0)) throw DomainError("phantom touches the plane");
    }
    return g;
}

}  // namespace sradon
