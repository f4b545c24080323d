#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sradon {

//---------------------------------------------------------------------------//
// Error types
//---------------------------------------------------------------------------//
//! Input is outside the domain of an operation (point off surface, x not in Omega).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

//! Malformed argument (empty patch, grid too short, non-positive radius).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

//! Direction is excluded for this surface (vertical for paraboloid, horizontal for plane).
struct TangentialDirection : DomainError {
    using DomainError::DomainError;
};

//! A principal-value query radius coincides with a quadrature node.
struct SingularNode : DomainError {
    using DomainError::DomainError;
};

//! Query radius lies beyond the sampled range.
struct ExtrapolationError : DomainError {
    using DomainError::DomainError;
};

//! Too many back-projection samples fell outside the filtered radius range.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

//! Operation is not implemented for this surface kind or dimension.
struct Unsupported : std::logic_error {
    using std::logic_error::logic_error;
};

//---------------------------------------------------------------------------//
// Fixed-dimension vector
//---------------------------------------------------------------------------//
template<int N>
struct Vec {
    static_assert(N >= 1);
    std::array<double, N> v{};

    constexpr double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    constexpr double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    static constexpr Vec unit(int axis) {
        Vec e;
        e[axis] = 1.0;
        return e;
    }

    friend constexpr Vec operator+(Vec a, Vec const& b) {
        for (int i = 0; i < N; ++i) a[i] += b[i];
        return a;
    }
    friend constexpr Vec operator-(Vec a, Vec const& b) {
        for (int i = 0; i < N; ++i) a[i] -= b[i];
        return a;
    }
    friend constexpr Vec operator-(Vec a) {
        for (int i = 0; i < N; ++i) a[i] = -a[i];
        return a;
    }
    friend constexpr Vec operator*(double s, Vec a) {
        for (int i = 0; i < N; ++i) a[i] *= s;
        return a;
    }
    friend constexpr Vec operator*(Vec a, double s) { return s * a; }
    friend constexpr bool operator==(Vec const&, Vec const&) = default;
};

template<int N>
constexpr double dot(Vec<N> const& a, Vec<N> const& b) {
    double s = 0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template<int N>
inline double norm(Vec<N> const& a) {
    return std::sqrt(dot(a, a));
}

template<int N>
inline double distance(Vec<N> const& a, Vec<N> const& b) {
    return norm(a - b);
}

template<int N>
Vec<N> from_vector(std::vector<double> const& xs) {
    if (static_cast<int>(xs.size()) != N)
        throw ArgumentError("expected a point with " + std::to_string(N) + " coordinates, got "
                            + std::to_string(xs.size()));
    Vec<N> out;
    for (int i = 0; i < N; ++i) out[i] = xs[static_cast<std::size_t>(i)];
    return out;
}

template<int N>
std::vector<double> to_vector(Vec<N> const& x) {
    return {x.v.begin(), x.v.end()};
}

//---------------------------------------------------------------------------//
// Uniform 1D grid: start + i * step, i = 0 .. count-1
//---------------------------------------------------------------------------//
struct UniformGrid {
    double start = 0;
    double step = 1;
    std::size_t count = 0;

    double operator[](std::size_t i) const { return start + static_cast<double>(i) * step; }
    double back() const { return (*this)[count - 1]; }
    friend bool operator==(UniformGrid const&, UniformGrid const&) = default;
};

//---------------------------------------------------------------------------//
// Gauss-Legendre rule on [-1, 1], cached per order
//---------------------------------------------------------------------------//
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureRule compute_gauss_legendre(int order) {
    if (order < 1) throw ArgumentError("Gauss-Legendre order must be positive");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    int const half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_order
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double const p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p0 = 1;
            dp = order * (x * p1 - p0) / (x * x - 1);
            double const dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1, p1 = x;
        for (int k = 2; k <= order; ++k) {
            double const p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order == 1 ? 1.0 : order * (x * p1 - p0) / (x * x - 1);
        double const w = 2.0 / ((1 - x * x) * dp * dp);
        auto const lo = static_cast<std::size_t>(i);
        auto const hi = static_cast<std::size_t>(order - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (order % 2 == 1) rule.nodes[static_cast<std::size_t>(order / 2)] = 0.0;
    return rule;
}

inline QuadratureRule const& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

//---------------------------------------------------------------------------//
/*!
 * Finite-difference weights for the derivative of order \c m at \c x0 using
 * the given (distinct) stencil offsets. Fornberg's recursion.
 */
inline std::vector<double> fd_weights(double x0, std::vector<double> const& offsets, int m) {
    int const n = static_cast<int>(offsets.size()) - 1;
    if (n < m) throw ArgumentError("stencil too small for derivative order");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    auto at = [&](int i, int k) -> double& {
        return c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    };
    double c1 = 1.0;
    double c4 = offsets[0] - x0;
    at(0, 0) = 1.0;
    for (int i = 1; i <= n; ++i) {
        int const mn = std::min(i, m);
        double c2 = 1.0;
        double const c5 = c4;
        c4 = offsets[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            double const c3 = offsets[static_cast<std::size_t>(i)] - offsets[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
                at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
            at(j, 0) = c4 * at(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = at(i, m);
    return out;
}

//---------------------------------------------------------------------------//
// Parallel loop over [0, count). Each index must be independent; the static
// partition makes results identical for any worker count.
//---------------------------------------------------------------------------//
inline unsigned default_workers() {
    unsigned const hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

template<class F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t const lo = count * w / workers;
        std::size_t const hi = count * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

//! Quintic smoothstep on [0,1]: 0 -> 0, 1 -> 1, C2 at both ends.
inline double smoothstep5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (t * 6 - 15) + 10);
}

}  // namespace sradon
