#pragma once

#include <string>
#include <vector>

#include "sradon/core.hpp"
#include "sradon/geometry.hpp"
#include "sradon/image.hpp"

namespace sradon {

enum class PrimitiveType { IndicatorBall, SmoothBump };

//! Radially symmetric primitive: a on the ball, or a (1 - |x-c|^2/rho^2)^p.
template<int N>
struct Primitive {
    PrimitiveType type = PrimitiveType::IndicatorBall;
    Vec<N> center;
    double radius = 1;
    double amplitude = 1;
    double exponent = 3;

    //! Value as a function of squared distance to the center.
    double profile(double dist2) const {
        double const rho2 = radius * radius;
        if (!(dist2 < rho2)) return 0.0;
        if (type == PrimitiveType::IndicatorBall) return amplitude;
        return amplitude * std::pow(1.0 - dist2 / rho2, exponent);
    }

    double value(Vec<N> const& x) const {
        Vec<N> const d = x - center;
        return profile(dot(d, d));
    }
};

template<int N>
Primitive<N> indicator_ball(Vec<N> center, double radius, double amplitude = 1.0) {
    if (!(radius > 0)) throw ArgumentError("primitive radius must be positive");
    return {PrimitiveType::IndicatorBall, center, radius, amplitude, 0.0};
}

template<int N>
Primitive<N> smooth_bump(Vec<N> center, double radius, double amplitude = 1.0, double exponent = 3.0) {
    if (!(radius > 0)) throw ArgumentError("primitive radius must be positive");
    if (!(exponent > 0)) throw ArgumentError("taper exponent must be positive");
    return {PrimitiveType::SmoothBump, center, radius, amplitude, exponent};
}

template<int N>
struct Phantom {
    std::vector<Primitive<N>> terms;

    double eval(Vec<N> const& x) const {
        double s = 0;
        for (auto const& t : terms) s += t.value(x);
        return s;
    }

    //! Radius of the origin-centered ball containing every support.
    double support_radius() const {
        double r = 0;
        for (auto const& t : terms) r = std::max(r, norm(t.center) + t.radius);
        return r;
    }

    double max_abs() const {
        double s = 0;
        for (auto const& t : terms) s += std::abs(t.amplitude);
        return s;
    }

    //! Bounding box of all supports as (lo, hi).
    std::pair<Vec<N>, Vec<N>> support_box() const {
        if (terms.empty()) throw ArgumentError("empty phantom has no support");
        Vec<N> lo = terms.front().center, hi = lo;
        for (auto const& t : terms)
            for (int i = 0; i < N; ++i) {
                lo[i] = std::min(lo[i], t.center[i] - t.radius);
                hi[i] = std::max(hi[i], t.center[i] + t.radius);
            }
        return {lo, hi};
    }
};

//! Phantom from sum of per-term phantoms.
template<int N>
Phantom<N> operator+(Phantom<N> a, Phantom<N> const& b) {
    a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
    return a;
}

/*!
 * Check that every support ball lies strictly inside Omega.
 *
 * Q restricted to the ball is bounded by Q(c) + rho |grad Q(c)| + rho^2 max alpha,
 * which is sharp for spheres and planes and conservative otherwise.
 */
template<int N>
bool support_inside(Phantom<N> const& f, Surface<N> const& s) {
    double amax = 0;
    for (int j = 0; j < N; ++j) amax = std::max(amax, s.alpha()[j]);
    for (auto const& t : f.terms) {
        double const bound = s.level(t.center) + t.radius * norm(s.gradient(t.center))
                             + t.radius * t.radius * amax;
        if (!(bound < 0)) return false;
    }
    return true;
}

template<int N>
ImageGrid<N> rasterize(Phantom<N> const& f, GridSpec<N> const& grid) {
    ImageGrid<N> img(grid);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = f.eval(grid.cell_center(i));
    img.provenance["source"] = "rasterize";
    return img;
}

}  // namespace sradon
