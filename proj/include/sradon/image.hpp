#pragma once

#include <array>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "sradon/core.hpp"

namespace sradon {

//! Uniform cell-centered grid over the box [lo, hi].
template<int N>
struct GridSpec {
    Vec<N> lo;
    Vec<N> hi;
    std::array<std::size_t, N> dims{};

    static GridSpec cube(Vec<N> const& center, double half_width, std::size_t size) {
        GridSpec g;
        for (int i = 0; i < N; ++i) {
            g.lo[i] = center[i] - half_width;
            g.hi[i] = center[i] + half_width;
            g.dims[static_cast<std::size_t>(i)] = size;
        }
        return g;
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }

    double spacing(int axis) const {
        return (hi[axis] - lo[axis]) / static_cast<double>(dims[static_cast<std::size_t>(axis)]);
    }

    double cell_volume() const {
        double v = 1;
        for (int i = 0; i < N; ++i) v *= spacing(i);
        return v;
    }

    //! Multi-index of a flat index; axis 0 varies fastest.
    std::array<std::size_t, N> unflatten(std::size_t flat) const {
        std::array<std::size_t, N> idx{};
        for (std::size_t a = 0; a < N; ++a) {
            idx[a] = flat % dims[a];
            flat /= dims[a];
        }
        return idx;
    }

    std::size_t flatten(std::array<std::size_t, N> const& idx) const {
        std::size_t flat = 0;
        for (std::size_t a = N; a-- > 0;) flat = flat * dims[a] + idx[a];
        return flat;
    }

    Vec<N> cell_center(std::size_t flat) const {
        auto const idx = unflatten(flat);
        Vec<N> x;
        for (int a = 0; a < N; ++a)
            x[a] = lo[a] + (static_cast<double>(idx[static_cast<std::size_t>(a)]) + 0.5) * spacing(a);
        return x;
    }

    void validate() const {
        for (int a = 0; a < N; ++a) {
            if (!(hi[a] > lo[a])) throw ArgumentError("grid box must have positive extent");
            if (dims[static_cast<std::size_t>(a)] == 0) throw ArgumentError("grid dims must be positive");
        }
    }

    friend bool operator==(GridSpec const&, GridSpec const&) = default;
};

template<int N>
struct ImageGrid {
    GridSpec<N> spec;
    std::vector<double> values;
    nlohmann::json provenance = nlohmann::json::object();

    ImageGrid() = default;
    explicit ImageGrid(GridSpec<N> const& g) : spec(g), values(g.size(), 0.0) { g.validate(); }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

//---------------------------------------------------------------------------//
// Metrics
//---------------------------------------------------------------------------//
//! ||a - b|| / ||b|| over the cells where mask is nonzero (all cells if empty).
inline double relative_l2(std::vector<double> const& a, std::vector<double> const& b,
                          std::vector<char> const& mask = {}) {
    if (a.size() != b.size()) throw ArgumentError("relative_l2: size mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        double const d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    if (den == 0) return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

inline double max_abs_error(std::vector<double> const& a, std::vector<double> const& b,
                            std::vector<char> const& mask = {}) {
    if (a.size() != b.size()) throw ArgumentError("max_abs_error: size mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (mask.empty() || mask[i]) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace sradon
