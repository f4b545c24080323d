#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "sradon/core.hpp"
#include "sradon/forward.hpp"
#include "sradon/geometry.hpp"
#include "sradon/image.hpp"
#include "sradon/polynomial.hpp"

namespace sradon {

//---------------------------------------------------------------------------//
// Cut-offs
//---------------------------------------------------------------------------//
/*!
 * Spatial cut-off chi and temporal cut-off eta.
 *
 * chi is a product of per-parameter profiles: 1 on [Gamma0.lo, Gamma0.hi],
 * 0 outside [Gamma.lo, Gamma.hi], quintic smoothstep in between. Periodic
 * chart parameters are unwrapped into [Gamma.lo, Gamma.lo + 2 pi). An unset
 * Gamma0 means the whole chart.
 *
 * eta is 1 on r <= R, 0 on r >= R + eps, quintic smoothstep in between.
 */
struct CutoffSpec {
    std::optional<ParamBox> gamma0;
    std::optional<ParamBox> gamma;
    double R = std::numeric_limits<double>::infinity();
    double eps = 0;

    static CutoffSpec full() { return {}; }

    ParamBox const& outer() const { return gamma ? *gamma : *gamma0; }

    void validate() const {
        if (!(R >= 0)) throw ArgumentError("cut-off radius must be non-negative");
        if (!(eps >= 0)) throw ArgumentError("cut-off taper must be non-negative");
        if (gamma && !gamma0) throw ArgumentError("Gamma given without Gamma0");
        if (!gamma0) return;
        auto const& in = *gamma0;
        auto const& out = outer();
        if (in.lo.size() != in.hi.size() || out.lo.size() != in.lo.size() || out.hi.size() != in.lo.size())
            throw ArgumentError("Gamma0 and Gamma dimensions differ");
        for (std::size_t d = 0; d < in.dims(); ++d)
            if (in.lo[d] <= in.hi[d] && (out.lo[d] > in.lo[d] || out.hi[d] < in.hi[d]))
                throw ArgumentError("Gamma0 must lie inside Gamma");
    }
};

namespace detail {

template<int N>
double unwrap(Surface<N> const& s, std::size_t d, double p, double base) {
    if (!s.param_periodic(static_cast<int>(d))) return p;
    double const period = 2 * std::numbers::pi;
    return base + std::fmod(std::fmod(p - base, period) + period, period);
}

inline double taper_profile(double p, double out_lo, double in_lo, double in_hi, double out_hi) {
    if (in_lo > in_hi) return 0.0;  // empty Gamma0
    if (p >= in_lo && p <= in_hi) return 1.0;
    if (p < in_lo) {
        if (p <= out_lo || in_lo <= out_lo) return 0.0;
        return smoothstep5((p - out_lo) / (in_lo - out_lo));
    }
    if (p >= out_hi || out_hi <= in_hi) return 0.0;
    return smoothstep5((out_hi - p) / (out_hi - in_hi));
}

}  // namespace detail

template<int N>
double chi(CutoffSpec const& cut, Surface<N> const& s, std::vector<double> const& params) {
    if (!cut.gamma0) return 1.0;
    auto const& in = *cut.gamma0;
    auto const& out = cut.outer();
    double v = 1.0;
    for (std::size_t d = 0; d < in.dims(); ++d) {
        double const p = detail::unwrap(s, d, params[d], out.lo[d]);
        v *= detail::taper_profile(p, out.lo[d], in.lo[d], in.hi[d], out.hi[d]);
        if (v == 0) break;
    }
    return v;
}

//! z in closure(Gamma0), in chart parameters.
template<int N>
bool in_gamma0(CutoffSpec const& cut, Surface<N> const& s, std::vector<double> const& params) {
    if (!cut.gamma0) return true;
    auto const& in = *cut.gamma0;
    for (std::size_t d = 0; d < in.dims(); ++d) {
        double const p = detail::unwrap(s, d, params[d], cut.outer().lo[d]);
        if (!(p >= in.lo[d] && p <= in.hi[d])) return false;
    }
    return true;
}

inline double eta(CutoffSpec const& cut, double r) {
    if (r <= cut.R) return 1.0;
    if (cut.eps <= 0 || r >= cut.R + cut.eps) return 0.0;
    return 1.0 - smoothstep5((r - cut.R) / cut.eps);
}

//! g(z, r) = chi(z) eta(r) R(f)(z, r)
template<int N>
Sinogram<N> apply_cutoffs(Sinogram<N> sino, CutoffSpec const& cut) {
    if (sino.filter) throw ArgumentError("cut-offs apply to raw data, not filtered data");
    cut.validate();
    std::vector<double> eta_r(sino.radii.count);
    for (std::size_t i = 0; i < eta_r.size(); ++i) eta_r[i] = eta(cut, sino.radii[i]);
    for (std::size_t j = 0; j < sino.centers.size(); ++j) {
        double const c = chi(cut, sino.surface, sino.centers[j].params);
        auto col = sino.column(j);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] *= c * eta_r[i];
    }
    sino.metadata["cutoff"] = {{"R", cut.R}, {"eps", cut.eps}};
    return sino;
}

//---------------------------------------------------------------------------//
// Visible zone
//---------------------------------------------------------------------------//
template<int N>
struct CovectorProbe {
    Vec<N> x;
    Vec<N> xi;
    bool in_plus = false;
    bool in_minus = false;
    bool in_visible = false;
    double a_plus = 0;
    double a_minus = 0;
    double eta_plus = 0;
    double eta_minus = 0;
    double sigma0 = 0;
    ChordHit<N> hit;
};

/*!
 * Membership of (x, xi) in A_+, A_- and A = A_+ u A_-.
 *
 * (x, xi) is in A_+ iff z_+ is in Gamma0 and |x - z_+| <= R, and likewise
 * for A_- with z_-. The plane has the single hit z(x, xi) and A_- is empty.
 */
template<int N>
CovectorProbe<N> classify_covector(Vec<N> const& x, Vec<N> const& xi, Surface<N> const& s,
                                   CutoffSpec const& cut) {
    CovectorProbe<N> p{};
    p.x = x;
    p.xi = xi;
    p.hit = ray_intersections(s, x, xi);
    auto side = [&](Vec<N> const& z, bool& inside, double& a, double& e) {
        auto const params = s.chart_params(z);
        double const r = distance(x, z);
        inside = in_gamma0(cut, s, params) && r <= cut.R;
        a = chi(cut, s, params);
        e = eta(cut, r);
    };
    side(p.hit.z_plus, p.in_plus, p.a_plus, p.eta_plus);
    if (s.is_plane()) {
        p.sigma0 = p.a_plus * p.eta_plus;
    } else {
        side(*p.hit.z_minus, p.in_minus, p.a_minus, p.eta_minus);
        p.sigma0 = 0.5 * (p.eta_plus * p.a_plus + p.eta_minus * p.a_minus);
    }
    p.in_visible = p.in_plus || p.in_minus;
    return p;
}

template<int N>
double principal_symbol(Vec<N> const& x, Vec<N> const& xi, Surface<N> const& s, CutoffSpec const& cut) {
    return classify_covector(x, xi, s, cut).sigma0;
}

//! Directions evenly spread over a half-sphere (xi and -xi give the same covector line).
template<int N>
std::vector<Vec<N>> probe_directions(std::size_t m) {
    std::vector<Vec<N>> dirs;
    dirs.reserve(m);
    if constexpr (N == 2) {
        for (std::size_t k = 0; k < m; ++k) {
            double const a = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
            dirs.push_back(Vec<2>{{std::cos(a), std::sin(a)}});
        }
    } else if constexpr (N == 3) {
        // Fibonacci lattice on the upper hemisphere
        double const golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < m; ++k) {
            double const zc = 1.0 - (static_cast<double>(k) + 0.5) / static_cast<double>(m);
            double const rad = std::sqrt(1 - zc * zc);
            double const phi = golden * static_cast<double>(k);
            dirs.push_back(Vec<3>{{rad * std::cos(phi), rad * std::sin(phi), zc}});
        }
    } else {
        throw Unsupported("probe directions only for n = 2, 3");
    }
    return dirs;
}

enum VisibilityBits : std::uint8_t { kInPlus = 1, kInMinus = 2, kTangential = 4 };

template<int N>
struct VisibleZone {
    GridSpec<N> grid;
    std::vector<Vec<N>> directions;
    std::vector<std::uint8_t> bits;  //!< cell-major, direction fastest
    std::vector<double> sigma0;

    std::size_t index(std::size_t cell, std::size_t dir) const { return cell * directions.size() + dir; }
};

template<int N>
VisibleZone<N> visible_zone_mask(GridSpec<N> const& grid, std::vector<Vec<N>> const& directions,
                                 Surface<N> const& s, CutoffSpec const& cut, unsigned workers = 1) {
    VisibleZone<N> vz{grid, directions, {}, {}};
    vz.bits.assign(grid.size() * directions.size(), 0);
    vz.sigma0.assign(vz.bits.size(), 0.0);
    parallel_for(grid.size(), workers, [&](std::size_t cell) {
        Vec<N> const x = grid.cell_center(cell);
        for (std::size_t d = 0; d < directions.size(); ++d) {
            auto const k = vz.index(cell, d);
            try {
                auto const p = classify_covector(x, directions[d], s, cut);
                vz.bits[k] = static_cast<std::uint8_t>((p.in_plus ? kInPlus : 0) | (p.in_minus ? kInMinus : 0));
                vz.sigma0[k] = p.sigma0;
            } catch (TangentialDirection const&) {
                vz.bits[k] = kTangential;
            }
        }
    });
    return vz;
}

//---------------------------------------------------------------------------//
// J_k symbols
//---------------------------------------------------------------------------//
/*!
 * J_k(x, xi) = |xi|^k / |x - z_+|^k + (-1)^k |xi|^k / |x - z_-|^k
 *            = t_+^{-k} + (-1)^k |t_-|^{-k}
 * from the ray intersections.
 */
template<int N>
double jk_direct(Surface<N> const& s, Vec<N> const& x, Vec<N> const& xi, int k) {
    if (s.is_plane()) throw Unsupported("J_k needs two intersections");
    auto const hit = ray_intersections(s, x, xi);
    double const sign = k % 2 == 0 ? 1.0 : -1.0;
    return std::pow(hit.t_plus, -k) + sign * std::pow(std::abs(*hit.t_minus), -k);
}

/*!
 * Closed form of J_k in terms of the discriminant.
 *
 * Ellipsoid: 1/|t_+-| = (+-<x,xi> + sqrt(Delta')) / (1 - ||x||^2).
 * Paraboloid / quadric: 1/|t_+-| = (sqrt(Delta) +- b) / (-2 c), with
 * b = 2<x',xi'> - l(xi''), c = Q(x) < 0.
 */
template<int N>
double jk_closed_form(Surface<N> const& s, Vec<N> const& x, Vec<N> const& xi, int k) {
    if (!contains(s, x)) throw DomainError("x is not inside Omega");
    double plus = 0, minus = 0;
    if (s.kind() == SurfaceKind::Ellipsoid) {
        double p = 0, nx = 0, nxi = 0;
        for (int j = 0; j < N; ++j) {
            p += s.alpha()[j] * x[j] * xi[j];
            nx += s.alpha()[j] * x[j] * x[j];
            nxi += s.alpha()[j] * xi[j] * xi[j];
        }
        double const root = std::sqrt((1 - nx) * nxi + p * p);
        plus = (p + root) / (1 - nx);
        minus = (-p + root) / (1 - nx);
    } else if (s.kind() == SurfaceKind::EllipticParaboloid || s.kind() == SurfaceKind::GeneralQuadric) {
        double a = 0, b = 0;
        for (int j = 0; j < N; ++j) {
            a += s.alpha()[j] * xi[j] * xi[j];
            b += (2 * s.alpha()[j] * x[j] - s.beta()[j]) * xi[j];
        }
        double const c = s.level(x);
        double const root = std::sqrt(b * b - 4 * a * c);
        plus = (root + b) / (-2 * c);
        minus = (root - b) / (-2 * c);
    } else {
        throw Unsupported("closed-form J_k needs an ellipsoid, paraboloid or general quadric");
    }
    double const sign = k % 2 == 0 ? 1.0 : -1.0;
    return std::pow(plus, k) + sign * std::pow(minus, k);
}

inline double binomial(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/*!
 * J_k(x, .) as an explicit polynomial in xi.
 *
 * With u = sqrt(Delta) and linear form v, (v + u)^k + (-1)^k (u - v)^k keeps
 * only even powers of u, so it equals 2 sum_{j even} C(k,j) v^(k-j) Delta^(j/2):
 * a homogeneous polynomial of degree k. The hyperplane branch returns the
 * correction symbol xi_n^k.
 */
template<int N>
Polynomial<N> jk_polynomial_expand(Surface<N> const& s, Vec<N> const& x, int k) {
    if (k < 0) throw ArgumentError("k must be non-negative");
    if (!contains(s, x)) throw DomainError("x is not inside Omega");
    if (s.is_plane()) return Polynomial<N>::variable(N - 1).pow(k);

    Polynomial<N> lin;
    Polynomial<N> disc;
    double denom = 0;
    if (s.kind() == SurfaceKind::Ellipsoid) {
        Vec<N> w;
        double nx = 0;
        for (int j = 0; j < N; ++j) {
            w[j] = s.alpha()[j] * x[j];
            nx += s.alpha()[j] * x[j] * x[j];
        }
        lin = linear_form(w);
        disc = (1 - nx) * diagonal_quadratic_form(s.alpha()) + lin * lin;
        denom = 1 - nx;
    } else if (s.kind() == SurfaceKind::EllipticParaboloid || s.kind() == SurfaceKind::GeneralQuadric) {
        Vec<N> w;
        for (int j = 0; j < N; ++j) w[j] = 2 * s.alpha()[j] * x[j] - s.beta()[j];
        lin = linear_form(w);
        double const c = s.level(x);
        disc = lin * lin - (4 * c) * diagonal_quadratic_form(s.alpha());
        denom = -2 * c;
    } else {
        throw Unsupported("J_k expansion needs a quadric surface");
    }

    Polynomial<N> out;
    for (int j = 0; j <= k; j += 2)
        out += (2 * binomial(k, j)) * (lin.pow(k - j) * disc.pow(j / 2));
    out *= std::pow(denom, -k);
    if (out.degree() > k) throw std::logic_error("J_k expansion exceeded degree k");
    return out;
}

//---------------------------------------------------------------------------//
// Finite-difference iterated Laplacian
//---------------------------------------------------------------------------//
namespace detail {

template<int N>
double composed_laplacian(std::function<double(Vec<N> const&)> const& h, Vec<N> const& at, int k, double step) {
    if (k == 0) return h(at);
    double const inv = 1.0 / (step * step);
    double const center = composed_laplacian(h, at, k - 1, step);
    double acc = 0;
    for (int i = 0; i < N; ++i) {
        Vec<N> const e = step * Vec<N>::unit(i);
        acc += composed_laplacian(h, at + e, k - 1, step) + composed_laplacian(h, at - e, k - 1, step)
               - 2 * center;
    }
    return acc * inv;
}

}  // namespace detail

/*!
 * Delta^k h(xi0) by k-fold composition of the (2n+1)-point Laplacian,
 * Richardson-extrapolated from steps s and s/2.
 */
template<int N>
double laplacian_power_fd(std::function<double(Vec<N> const&)> const& h, Vec<N> const& xi0, int k,
                          double step) {
    if (k < 0) throw ArgumentError("k must be non-negative");
    double const scale = std::max(1.0, norm(xi0));
    if (!(step > 1e-8 * scale)) throw ArgumentError("finite-difference step underflow");
    if (k == 0) return h(xi0);
    double const coarse = detail::composed_laplacian(h, xi0, k, step);
    double const fine = detail::composed_laplacian(h, xi0, k, 0.5 * step);
    return (4 * fine - coarse) / 3;
}

//---------------------------------------------------------------------------//
// Partial-data symbol report
//---------------------------------------------------------------------------//
template<int N>
struct SymbolTerm {
    int k = 0;
    double jk_value = 0;        //!< J_{k,p}(x, x, xi)
    double fd_laplacian = 0;    //!< Delta^k J_{k,p} by finite differences
    double exact_laplacian = 0; //!< Delta^k of the exact J_k polynomial
    int degree = -1;
    Polynomial<N> polynomial;
};

template<int N>
struct SymbolReport {
    CovectorProbe<N> probe;
    std::vector<SymbolTerm<N>> terms;
    std::complex<double> symbol;  //!< sigma0 + sum_k c_k Delta^k J_{k,p}
    bool both_sides = false;      //!< probe in A_+ n A_-
};

/*!
 * Cut-off weighted correction symbols at y = x:
 * J_{k,p} = eta_+ a_+ t_+^{-k} + (-1)^k eta_- a_- |t_-|^{-k}
 * (plane: a eta xi_n^k with the factor i^k / ((2 x_n)^k k!)).
 */
template<int N>
SymbolReport<N> partial_symbol_probe(Vec<N> const& x, Vec<N> const& xi, int k_max, Surface<N> const& s,
                                     CutoffSpec const& cut, double fd_step = 0.0) {
    if (k_max < 0) throw ArgumentError("k_max must be non-negative");
    SymbolReport<N> rep;
    rep.probe = classify_covector(x, xi, s, cut);
    rep.both_sides = rep.probe.in_plus && rep.probe.in_minus;
    rep.symbol = rep.probe.sigma0;
    if (fd_step <= 0) fd_step = 0.2 * norm(xi);
    bool const plane = s.is_plane();

    for (int k = 1; k <= k_max; ++k) {
        std::function<double(Vec<N> const&)> jkp = [&, k](Vec<N> const& v) {
            auto const p = classify_covector(x, v, s, cut);
            if (plane) return p.a_plus * p.eta_plus * std::pow(v[N - 1], k);
            double const sign = k % 2 == 0 ? 1.0 : -1.0;
            return p.eta_plus * p.a_plus * std::pow(p.hit.t_plus, -k)
                   + sign * p.eta_minus * p.a_minus * std::pow(std::abs(*p.hit.t_minus), -k);
        };
        SymbolTerm<N> term;
        term.k = k;
        term.jk_value = jkp(xi);
        term.fd_laplacian = laplacian_power_fd<N>(jkp, xi, k, fd_step);
        term.polynomial = jk_polynomial_expand(s, x, k);
        term.degree = term.polynomial.degree();
        term.exact_laplacian = term.polynomial.laplacian_power(k)(xi);

        double fact = 1;
        for (int i = 2; i <= k; ++i) fact *= i;
        std::complex<double> coeff;
        if (plane) {
            coeff = std::pow(std::complex<double>(0, 1), k) / (std::pow(2 * x[N - 1], k) * fact);
        } else {
            coeff = std::pow(std::complex<double>(0, -1), k) / (std::pow(2.0, k) * fact);
        }
        rep.symbol += coeff * term.fd_laplacian;
        rep.terms.push_back(std::move(term));
    }
    return rep;
}

}  // namespace sradon
