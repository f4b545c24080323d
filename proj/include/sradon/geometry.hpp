#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sradon/core.hpp"

namespace sradon {

enum class SurfaceKind { Ellipsoid, EllipticParaboloid, Hyperplane, GeneralQuadric };

inline std::string to_string(SurfaceKind kind) {
    switch (kind) {
        case SurfaceKind::Ellipsoid: return "ellipsoid";
        case SurfaceKind::EllipticParaboloid: return "paraboloid";
        case SurfaceKind::Hyperplane: return "hyperplane";
        case SurfaceKind::GeneralQuadric: return "quadric";
    }
    return "unknown";
}

inline SurfaceKind surface_kind_from_string(std::string const& s) {
    if (s == "ellipsoid" || s == "ellipse" || s == "circle" || s == "sphere")
        return SurfaceKind::Ellipsoid;
    if (s == "paraboloid" || s == "parabola") return SurfaceKind::EllipticParaboloid;
    if (s == "hyperplane" || s == "plane") return SurfaceKind::Hyperplane;
    if (s == "quadric") return SurfaceKind::GeneralQuadric;
    throw ArgumentError("unknown surface kind '" + s + "'");
}

//! Axis-aligned box in chart parameters.
struct ParamBox {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dims() const { return lo.size(); }
    friend bool operator==(ParamBox const&, ParamBox const&) = default;
};

//---------------------------------------------------------------------------//
/*!
 * Observation surface S, stored as the zero set of
 * \verbatim
   Q(z) = sum_j alpha_j z_j^2 - sum_j beta_j z_j - gamma
 * \endverbatim
 * with Omega = {Q < 0}. All four supported kinds are special cases:
 *
 * - ellipsoid:   alpha = omega^2, beta = 0, gamma = 1
 * - paraboloid:  alpha = (omega'^2, 0), beta = e_n, gamma = 0
 * - hyperplane:  alpha = 0, beta = e_n, gamma = 0   (Omega = {z_n > 0})
 * - quadric:     alpha_j = omega_j^2 (j < m), beta_j = omega_j (j >= m),
 *                gamma = omega_{n+1}
 */
template<int N>
class Surface {
  public:
    static_assert(N >= 2, "surfaces live in dimension >= 2");

    static Surface ellipsoid(std::vector<double> omega) {
        if (omega.size() != N) throw ArgumentError("ellipsoid needs n weights");
        for (double w : omega)
            if (!(w > 0) || !std::isfinite(w)) throw ArgumentError("ellipsoid weights must be positive");
        Surface s(SurfaceKind::Ellipsoid, omega, N);
        for (int j = 0; j < N; ++j) s.alpha_[j] = omega[j] * omega[j];
        s.gamma_ = 1.0;
        return s;
    }

    static Surface sphere(double radius) {
        if (!(radius > 0)) throw ArgumentError("sphere radius must be positive");
        return ellipsoid(std::vector<double>(N, 1.0 / radius));
    }

    static Surface paraboloid(std::vector<double> omega) {
        if (omega.size() != N - 1) throw ArgumentError("paraboloid needs n-1 weights");
        for (double w : omega)
            if (!(w > 0) || !std::isfinite(w)) throw ArgumentError("paraboloid weights must be positive");
        Surface s(SurfaceKind::EllipticParaboloid, omega, N - 1);
        for (int j = 0; j < N - 1; ++j) s.alpha_[j] = omega[j] * omega[j];
        s.beta_[N - 1] = 1.0;
        return s;
    }

    static Surface hyperplane() {
        Surface s(SurfaceKind::Hyperplane, {}, 0);
        s.beta_[N - 1] = 1.0;
        return s;
    }

    //! sum_{j<=m} w_j^2 z_j^2 = sum_{j>m} w_j z_j + w_{n+1}, with 1-based m.
    static Surface quadric(std::vector<double> omega, int m) {
        if (omega.size() != N + 1) throw ArgumentError("general quadric needs n+1 weights");
        if (m < 1 || m >= N) throw ArgumentError("general quadric split index must satisfy 1 <= m < n");
        bool quad = false, lin = false;
        for (int j = 0; j < N + 1; ++j) {
            if (!(omega[j] >= 0) || !std::isfinite(omega[j]))
                throw ArgumentError("general quadric weights must be non-negative");
            if (j < m && omega[j] > 0) quad = true;
            if (j >= m && j < N && omega[j] > 0) lin = true;
        }
        if (!quad || !lin) throw ArgumentError("general quadric needs omega' != 0 and omega'' != 0");
        Surface s(SurfaceKind::GeneralQuadric, omega, m);
        for (int j = 0; j < m; ++j) s.alpha_[j] = omega[j] * omega[j];
        for (int j = m; j < N; ++j) s.beta_[j] = omega[j];
        s.gamma_ = omega[N];
        return s;
    }

    SurfaceKind kind() const { return kind_; }
    std::vector<double> const& omega() const { return omega_; }
    int split() const { return split_; }
    bool is_plane() const { return kind_ == SurfaceKind::Hyperplane; }
    bool bounded() const { return kind_ == SurfaceKind::Ellipsoid; }

    Vec<N> const& alpha() const { return alpha_; }
    Vec<N> const& beta() const { return beta_; }
    double gamma() const { return gamma_; }

    //! Level function Q; negative inside Omega.
    double level(Vec<N> const& z) const {
        double q = -gamma_;
        for (int j = 0; j < N; ++j) q += alpha_[j] * z[j] * z[j] - beta_[j] * z[j];
        return q;
    }

    //! Magnitude scale of the terms in Q(z), for relative residual tests.
    double level_scale(Vec<N> const& z) const {
        double s = 1.0 + std::abs(gamma_);
        for (int j = 0; j < N; ++j) s += alpha_[j] * z[j] * z[j] + std::abs(beta_[j] * z[j]);
        return s;
    }

    Vec<N> gradient(Vec<N> const& z) const {
        Vec<N> g;
        for (int j = 0; j < N; ++j) g[j] = 2 * alpha_[j] * z[j] - beta_[j];
        return g;
    }

    //-----------------------------------------------------------------------//
    // Chart: ellipsoids use angles (n = 2, 3); the rest are graphs over the
    // coordinates other than graph_axis().
    //-----------------------------------------------------------------------//
    int graph_axis() const {
        for (int j = N - 1; j >= 0; --j)
            if (beta_[j] != 0) return j;
        return -1;
    }

    bool param_periodic(int d) const {
        if (kind_ != SurfaceKind::Ellipsoid) return false;
        return (N == 2 && d == 0) || (N == 3 && d == 1);
    }

    ParamBox default_patch() const {
        ParamBox box;
        if (kind_ == SurfaceKind::Ellipsoid) {
            if constexpr (N == 2) {
                box.lo = {-std::numbers::pi};
                box.hi = {std::numbers::pi};
            } else if constexpr (N == 3) {
                box.lo = {0.0, -std::numbers::pi};
                box.hi = {std::numbers::pi, std::numbers::pi};
            } else {
                throw Unsupported("angular chart only for n = 2, 3");
            }
        } else {
            box.lo.assign(N - 1, -4.0);
            box.hi.assign(N - 1, 4.0);
        }
        return box;
    }

    Vec<N> chart_point(std::vector<double> const& p) const {
        check_params(p);
        Vec<N> z;
        if (kind_ == SurfaceKind::Ellipsoid) {
            if constexpr (N == 2) {
                z[0] = std::cos(p[0]) / omega_[0];
                z[1] = std::sin(p[0]) / omega_[1];
            } else if constexpr (N == 3) {
                double const st = std::sin(p[0]);
                z[0] = st * std::cos(p[1]) / omega_[0];
                z[1] = st * std::sin(p[1]) / omega_[1];
                z[2] = std::cos(p[0]) / omega_[2];
            } else {
                throw Unsupported("angular chart only for n = 2, 3");
            }
            return z;
        }
        int const k = graph_axis();
        int d = 0;
        for (int j = 0; j < N; ++j)
            if (j != k) z[j] = p[static_cast<std::size_t>(d++)];
        double rhs = -gamma_;
        for (int j = 0; j < N; ++j)
            if (j != k) rhs += alpha_[j] * z[j] * z[j] - beta_[j] * z[j];
        z[k] = rhs / beta_[k];
        return z;
    }

    //! Inverse chart. Angles land in the default patch range.
    std::vector<double> chart_params(Vec<N> const& z) const {
        if (kind_ == SurfaceKind::Ellipsoid) {
            if constexpr (N == 2) {
                return {std::atan2(omega_[1] * z[1], omega_[0] * z[0])};
            } else if constexpr (N == 3) {
                double const c = std::clamp(omega_[2] * z[2], -1.0, 1.0);
                return {std::acos(c), std::atan2(omega_[1] * z[1], omega_[0] * z[0])};
            } else {
                throw Unsupported("angular chart only for n = 2, 3");
            }
        }
        int const k = graph_axis();
        std::vector<double> p;
        p.reserve(N - 1);
        for (int j = 0; j < N; ++j)
            if (j != k) p.push_back(z[j]);
        return p;
    }

    //! Surface area element |dz/dp| at chart parameters p.
    double area_element(std::vector<double> const& p) const {
        check_params(p);
        if (kind_ == SurfaceKind::Ellipsoid) {
            if constexpr (N == 2) {
                double const a = std::sin(p[0]) / omega_[0];
                double const b = std::cos(p[0]) / omega_[1];
                return std::sqrt(a * a + b * b);
            } else if constexpr (N == 3) {
                double const st = std::sin(p[0]), ct = std::cos(p[0]);
                double const sp = std::sin(p[1]), cp = std::cos(p[1]);
                Vec<3> dt{{ct * cp / omega_[0], ct * sp / omega_[1], -st / omega_[2]}};
                Vec<3> dp{{-st * sp / omega_[0], st * cp / omega_[1], 0.0}};
                Vec<3> cr{{dt[1] * dp[2] - dt[2] * dp[1], dt[2] * dp[0] - dt[0] * dp[2],
                           dt[0] * dp[1] - dt[1] * dp[0]}};
                return norm(cr);
            } else {
                throw Unsupported("angular chart only for n = 2, 3");
            }
        }
        Vec<N> const z = chart_point(p);
        int const k = graph_axis();
        double s = 1.0;
        for (int j = 0; j < N; ++j) {
            if (j == k) continue;
            double const dh = (2 * alpha_[j] * z[j] - beta_[j]) / beta_[k];
            s += dh * dh;
        }
        return std::sqrt(s);
    }

  private:
    Surface(SurfaceKind kind, std::vector<double> omega, int split)
        : kind_(kind), omega_(std::move(omega)), split_(split) {}

    void check_params(std::vector<double> const& p) const {
        if (p.size() != N - 1) throw ArgumentError("chart parameters must have n-1 entries");
    }

    SurfaceKind kind_;
    std::vector<double> omega_;
    int split_ = 0;
    Vec<N> alpha_{};
    Vec<N> beta_{};
    double gamma_ = 0;
};

//---------------------------------------------------------------------------//
// Membership and normals
//---------------------------------------------------------------------------//
//! True iff x is strictly inside Omega; boundary points are outside.
template<int N>
bool contains(Surface<N> const& s, Vec<N> const& x) {
    return s.level(x) < 0;
}

inline constexpr double kSurfaceTolerance = 1e-10;

template<int N>
bool on_surface(Surface<N> const& s, Vec<N> const& z, double tol = kSurfaceTolerance) {
    return std::abs(s.level(z)) <= tol * s.level_scale(z);
}

//! Unit normal pointing out of Omega.
template<int N>
Vec<N> outward_normal(Surface<N> const& s, Vec<N> const& z) {
    if (!on_surface(s, z)) throw DomainError("point is not on the surface");
    Vec<N> const g = s.gradient(z);
    return (1.0 / norm(g)) * g;
}

//---------------------------------------------------------------------------//
// Ray-surface intersection
//---------------------------------------------------------------------------//
template<int N>
struct ChordHit {
    double t_plus = 0;
    std::optional<double> t_minus;
    Vec<N> z_plus;
    std::optional<Vec<N>> z_minus;
    //! Delta' for the ellipsoid, Delta for paraboloid / quadric, b^2 for the plane.
    double discriminant = 0;
};

/*!
 * Intersections of the line x + t xi with S.
 *
 * Substituting the line into Q gives a t^2 + b t + c = 0 with c = Q(x) < 0,
 * so for a > 0 the roots have opposite signs. Roots are formed with the
 * cancellation-free pair q / a, c / q.
 */
template<int N>
ChordHit<N> ray_intersections(Surface<N> const& s, Vec<N> const& x, Vec<N> const& xi) {
    if (!contains(s, x)) throw DomainError("ray origin is not inside Omega");
    double xi2 = dot(xi, xi);
    if (!(xi2 > 0)) throw ArgumentError("direction must be nonzero");

    double a = 0, b = 0;
    double const c = s.level(x);
    for (int j = 0; j < N; ++j) {
        a += s.alpha()[j] * xi[j] * xi[j];
        b += 2 * s.alpha()[j] * x[j] * xi[j] - s.beta()[j] * xi[j];
    }

    ChordHit<N> hit;
    if (s.is_plane()) {
        if (xi[N - 1] == 0) throw TangentialDirection("horizontal direction never meets the plane");
        hit.t_plus = -x[N - 1] / xi[N - 1];
        hit.z_plus = x + hit.t_plus * xi;
        hit.z_plus[N - 1] = 0.0;
        hit.discriminant = b * b;
        return hit;
    }
    if (a == 0) throw TangentialDirection("direction meets the surface at most once");

    double const disc = b * b - 4 * a * c;
    double const root = std::sqrt(disc);
    double const q = -0.5 * (b + std::copysign(root, b));
    double const r1 = q / a;
    double const r2 = c / q;
    hit.t_plus = std::max(r1, r2);
    hit.t_minus = std::min(r1, r2);
    hit.z_plus = x + hit.t_plus * xi;
    hit.z_minus = x + *hit.t_minus * xi;
    // Delta' = Delta / 4 in the scaled-inner-product normalization
    hit.discriminant = s.kind() == SurfaceKind::Ellipsoid ? disc / 4 : disc;
    return hit;
}

//---------------------------------------------------------------------------//
// Surface quadrature
//---------------------------------------------------------------------------//
template<int N>
struct SurfaceQuadrature {
    std::vector<Vec<N>> nodes;
    std::vector<std::vector<double>> params;
    std::vector<double> weights;
    ParamBox patch;
    std::vector<std::size_t> resolution;

    std::size_t size() const { return nodes.size(); }
    double total_weight() const {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
};

//! Midpoint rule in chart parameters, area element folded into the weights.
template<int N>
SurfaceQuadrature<N> surface_quadrature(Surface<N> const& s, ParamBox const& patch,
                                        std::vector<std::size_t> const& resolution) {
    if (patch.dims() != N - 1 || patch.hi.size() != N - 1)
        throw ArgumentError("patch must have n-1 parameter ranges");
    if (resolution.size() != N - 1) throw ArgumentError("resolution must have n-1 entries");
    double cell = 1.0;
    std::vector<double> step(N - 1);
    for (std::size_t d = 0; d < N - 1; ++d) {
        if (!(patch.hi[d] > patch.lo[d])) throw ArgumentError("empty patch");
        if (resolution[d] == 0) throw ArgumentError("zero resolution");
        step[d] = (patch.hi[d] - patch.lo[d]) / static_cast<double>(resolution[d]);
        cell *= step[d];
    }
    SurfaceQuadrature<N> q;
    q.patch = patch;
    q.resolution = resolution;
    std::size_t total = 1;
    for (auto r : resolution) total *= r;
    q.nodes.reserve(total);
    q.params.reserve(total);
    q.weights.reserve(total);
    // first parameter varies slowest
    std::vector<std::size_t> idx(N - 1, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int d = N - 2; d >= 0; --d) {
            idx[static_cast<std::size_t>(d)] = rem % resolution[static_cast<std::size_t>(d)];
            rem /= resolution[static_cast<std::size_t>(d)];
        }
        std::vector<double> p(N - 1);
        for (std::size_t d = 0; d < N - 1; ++d)
            p[d] = patch.lo[d] + (static_cast<double>(idx[d]) + 0.5) * step[d];
        q.nodes.push_back(s.chart_point(p));
        q.weights.push_back(s.area_element(p) * cell);
        q.params.push_back(std::move(p));
    }
    return q;
}

}  // namespace sradon
