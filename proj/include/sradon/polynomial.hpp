#pragma once

#include <array>
#include <map>
#include <vector>

#include "sradon/core.hpp"

namespace sradon {

//! Sparse multivariate polynomial in N variables with real coefficients.
template<int N>
class Polynomial {
  public:
    using Exponent = std::array<int, N>;

    Polynomial() = default;

    static Polynomial constant(double c) {
        Polynomial p;
        p.add_term(Exponent{}, c);
        return p;
    }

    static Polynomial variable(int axis, double coeff = 1.0) {
        Exponent e{};
        e[static_cast<std::size_t>(axis)] = 1;
        Polynomial p;
        p.add_term(e, coeff);
        return p;
    }

    void add_term(Exponent const& e, double c) {
        if (c == 0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    std::map<Exponent, double> const& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    //! Total degree; -1 for the zero polynomial.
    int degree() const {
        int d = -1;
        for (auto const& [e, c] : terms_) {
            int s = 0;
            for (int x : e) s += x;
            d = std::max(d, s);
        }
        return d;
    }

    double coefficient(Exponent const& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? 0.0 : it->second;
    }

    double max_abs_coefficient() const {
        double m = 0;
        for (auto const& [e, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

    double operator()(Vec<N> const& x) const {
        double s = 0;
        for (auto const& [e, c] : terms_) {
            double t = c;
            for (int i = 0; i < N; ++i) t *= std::pow(x[i], e[static_cast<std::size_t>(i)]);
            s += t;
        }
        return s;
    }

    Polynomial& operator+=(Polynomial const& o) {
        for (auto const& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator*=(double s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }
    friend Polynomial operator+(Polynomial a, Polynomial const& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, Polynomial b) { return a += (b *= -1.0); }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(Polynomial const& a, Polynomial const& b) {
        Polynomial out;
        for (auto const& [ea, ca] : a.terms_)
            for (auto const& [eb, cb] : b.terms_) {
                Exponent e;
                for (std::size_t i = 0; i < N; ++i) e[i] = ea[i] + eb[i];
                out.add_term(e, ca * cb);
            }
        return out;
    }

    Polynomial pow(int k) const {
        if (k < 0) throw ArgumentError("negative polynomial power");
        Polynomial out = constant(1.0);
        for (int i = 0; i < k; ++i) out = out * *this;
        return out;
    }

    Polynomial derivative(int axis, int times = 1) const {
        Polynomial out;
        auto const a = static_cast<std::size_t>(axis);
        for (auto const& [e, c] : terms_) {
            if (e[a] < times) continue;
            double f = c;
            for (int t = 0; t < times; ++t) f *= e[a] - t;
            Exponent d = e;
            d[a] -= times;
            out.add_term(d, f);
        }
        return out;
    }

    Polynomial laplacian() const {
        Polynomial out;
        for (int i = 0; i < N; ++i) out += derivative(i, 2);
        return out;
    }

    Polynomial laplacian_power(int k) const {
        Polynomial out = *this;
        for (int i = 0; i < k; ++i) out = out.laplacian();
        return out;
    }

  private:
    std::map<Exponent, double> terms_;
};

//! sum_i w_i xi_i
template<int N>
Polynomial<N> linear_form(Vec<N> const& w) {
    Polynomial<N> p;
    for (int i = 0; i < N; ++i) p += Polynomial<N>::variable(i, w[i]);
    return p;
}

//! sum_i w_i xi_i^2
template<int N>
Polynomial<N> diagonal_quadratic_form(Vec<N> const& w) {
    Polynomial<N> p;
    for (int i = 0; i < N; ++i) {
        typename Polynomial<N>::Exponent e{};
        e[static_cast<std::size_t>(i)] = 2;
        p.add_term(e, w[i]);
    }
    return p;
}

}  // namespace sradon
