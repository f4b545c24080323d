#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sradon/core.hpp"
#include "sradon/geometry.hpp"
#include "sradon/phantom.hpp"

namespace sradon {

template<int N>
struct Center {
    Vec<N> point;
    std::vector<double> params;
    double weight = 0;  //!< surface quadrature weight
};

//! Set on sinograms whose columns hold filter output rather than R(f).
struct FilterInfo {
    int dimension = 2;
    bool even = true;
    //! Multiply the stored values by this to obtain P applied to the data.
    double prefactor = 1.0;
};

/*!
 * Samples of R(f)(z_j, r_i), center-major.
 *
 * For raw data the radius grid starts at h_r. After filtering, \c radii holds
 * the query grid (staggered by h_r/2 in even dimensions).
 */
template<int N>
struct Sinogram {
    Surface<N> surface = Surface<N>::hyperplane();
    ParamBox patch;
    std::vector<std::size_t> resolution;
    std::vector<Center<N>> centers;
    UniformGrid radii;
    std::vector<double> data;
    nlohmann::json metadata = nlohmann::json::object();
    std::optional<FilterInfo> filter;

    std::size_t num_centers() const { return centers.size(); }
    std::size_t num_radii() const { return radii.count; }

    double& at(std::size_t center, std::size_t radius) { return data[center * radii.count + radius]; }
    double at(std::size_t center, std::size_t radius) const { return data[center * radii.count + radius]; }

    std::span<double> column(std::size_t center) {
        return {data.data() + center * radii.count, radii.count};
    }
    std::span<double const> column(std::size_t center) const {
        return {data.data() + center * radii.count, radii.count};
    }
};

//! Radius grid r_i = (i + 1) h_r, i = 0 .. count-1, with h_r = r_max / count.
inline UniformGrid radius_grid(double r_max, std::size_t count) {
    if (!(r_max > 0) || count == 0) throw ArgumentError("radius grid needs r_max > 0 and count > 0");
    double const h = r_max / static_cast<double>(count);
    return {h, h, count};
}

//! Area of the sphere of radius r in R^N.
template<int N>
double sphere_area(double r) {
    if constexpr (N == 2) {
        return 2 * std::numbers::pi * r;
    } else if constexpr (N == 3) {
        return 4 * std::numbers::pi * r * r;
    } else {
        double const half = 0.5 * N;
        return 2 * std::pow(std::numbers::pi, half) / std::tgamma(half) * std::pow(r, N - 1);
    }
}

/*!
 * Integral of one radially symmetric primitive over S_r(z).
 *
 * The value on the sphere depends only on the angle theta to the axis z->c,
 * so the integral collapses to the cap theta < alpha that meets the support:
 * 2 r int_0^alpha f dtheta (n = 2) or 2 pi r^2 int_{cos alpha}^1 f du (n = 3),
 * each done with Gauss-Legendre on the cap.
 */
template<int N>
double primitive_sphere_integral(Primitive<N> const& prim, Vec<N> const& z, double r, int nodes) {
    static_assert(N == 2 || N == 3, "sphere integrals implemented for n = 2, 3");
    double const rho = prim.radius;
    double const d = distance(z, prim.center);
    if (d <= 1e-14 * (1 + r)) return sphere_area<N>(r) * prim.profile(r * r);

    double const cos_alpha = (r * r + d * d - rho * rho) / (2 * r * d);
    if (cos_alpha >= 1) return 0.0;
    double const u0 = std::max(cos_alpha, -1.0);
    auto dist2 = [&](double cos_theta) { return r * r + d * d - 2 * r * d * cos_theta; };

    if constexpr (N == 2) {
        double const alpha = std::acos(u0);
        if (prim.type == PrimitiveType::IndicatorBall) return 2 * alpha * r * prim.amplitude;
        auto const& gl = gauss_legendre(nodes);
        double s = 0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            double const theta = 0.5 * alpha * (gl.nodes[k] + 1);
            s += gl.weights[k] * prim.profile(dist2(std::cos(theta)));
        }
        return 2 * r * 0.5 * alpha * s;
    } else {
        double const cap = 2 * std::numbers::pi * r * r;
        if (prim.type == PrimitiveType::IndicatorBall) return cap * (1 - u0) * prim.amplitude;
        auto const& gl = gauss_legendre(nodes);
        double s = 0;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            double const u = u0 + 0.5 * (1 - u0) * (gl.nodes[k] + 1);
            s += gl.weights[k] * prim.profile(dist2(u));
        }
        return cap * 0.5 * (1 - u0) * s;
    }
}

//! Unnormalized surface integral of f over the sphere S_r(z).
template<int N>
double sphere_integral(Phantom<N> const& f, Vec<N> const& z, double r, int nodes = 64) {
    if (!(r > 0)) throw ArgumentError("sphere radius must be positive");
    if (nodes < 16) throw ArgumentError("sphere_integral needs at least 16 nodes");
    double s = 0;
    for (auto const& t : f.terms) s += primitive_sphere_integral(t, z, r, nodes);
    return s;
}

struct MonteCarloEstimate {
    double estimate = 0;
    double standard_error = 0;
};

//! |S_r| times the sample mean of f at uniform random points of S_r(z).
template<int N>
MonteCarloEstimate mc_sphere_integral(Phantom<N> const& f, Vec<N> const& z, double r,
                                      std::size_t samples, std::uint64_t seed) {
    if (!(r > 0)) throw ArgumentError("sphere radius must be positive");
    if (samples < 10000) throw ArgumentError("mc_sphere_integral needs at least 1e4 samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double mean = 0, m2 = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        Vec<N> u;
        double len2 = 0;
        do {
            for (int i = 0; i < N; ++i) u[i] = gauss(rng);
            len2 = dot(u, u);
        } while (len2 == 0);
        double const v = f.eval(z + (r / std::sqrt(len2)) * u);
        double const delta = v - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (v - mean);
    }
    double const area = sphere_area<N>(r);
    double const var = m2 / static_cast<double>(samples - 1);
    return {area * mean, area * std::sqrt(var / static_cast<double>(samples))};
}

struct ForwardOptions {
    int nodes = 64;
    unsigned workers = 1;
};

template<int N>
Sinogram<N> forward_sinogram(Phantom<N> const& f, Surface<N> const& surface,
                             SurfaceQuadrature<N> const& centers, UniformGrid const& radii,
                             ForwardOptions const& opts = {}) {
    if (!support_inside(f, surface)) throw DomainError("phantom support is not inside Omega");
    if (radii.count == 0 || !(radii.start > 0) || !(radii.step > 0))
        throw ArgumentError("radius grid must be positive and non-empty");
    Sinogram<N> sino{surface, centers.patch, centers.resolution, {}, radii, {}, {}, {}};
    sino.centers.reserve(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j)
        sino.centers.push_back({centers.nodes[j], centers.params[j], centers.weights[j]});
    sino.data.assign(centers.size() * radii.count, 0.0);
    parallel_for(sino.data.size(), opts.workers, [&](std::size_t cell) {
        std::size_t const j = cell / radii.count;
        std::size_t const i = cell % radii.count;
        sino.data[cell] = sphere_integral(f, sino.centers[j].point, radii[i], opts.nodes);
    });
    sino.metadata["generator"] = {{"nodes", opts.nodes}};
    return sino;
}

//! Post-hoc additive white Gaussian noise.
template<int N>
void add_gaussian_noise(Sinogram<N>& sino, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0)) throw ArgumentError("noise level must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& v : sino.data) v += gauss(rng);
    sino.metadata["noise"] = {{"sigma", sigma}, {"seed", seed}};
}

}  // namespace sradon
