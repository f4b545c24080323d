#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "sradon/filter.hpp"
#include "sradon/forward.hpp"
#include "sradon/microlocal.hpp"

using namespace sradon;

namespace {

constexpr double kPi = std::numbers::pi;

CutoffSpec half_circle(double R = std::numeric_limits<double>::infinity()) {
    CutoffSpec c;
    c.gamma0 = ParamBox{{-kPi / 2}, {kPi / 2}};
    c.R = R;
    return c;
}

double quintic(double t) { return t * t * t * (10 - 15 * t + 6 * t * t); }

}  // namespace

TEST(Cutoffs, FullDataIsIdentity) {
    auto const s = Surface<2>::sphere(1.5);
    auto const q = surface_quadrature(s, s.default_patch(), {32});
    auto const sino = forward_sinogram(Phantom<2>{{smooth_bump(Vec<2>{}, 0.5)}}, s, q, radius_grid(3, 64));
    EXPECT_EQ(apply_cutoffs(sino, CutoffSpec::full()).data, sino.data);
    CutoffSpec big = half_circle(10);
    big.gamma0 = s.default_patch();
    EXPECT_EQ(apply_cutoffs(sino, big).data, sino.data);
}

TEST(Cutoffs, EmptyGammaGivesZero) {
    auto const s = Surface<2>::sphere(1.5);
    auto const q = surface_quadrature(s, s.default_patch(), {32});
    auto const sino = forward_sinogram(Phantom<2>{{smooth_bump(Vec<2>{}, 0.5)}}, s, q, radius_grid(3, 64));
    CutoffSpec empty;
    empty.gamma0 = ParamBox{{1}, {0}};
    for (double v : apply_cutoffs(sino, empty).data) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(apply_cutoffs(filter_sinogram(sino), empty), ArgumentError);
}

TEST(Cutoffs, TaperBandMatchesSmoothstep) {
    auto const s = Surface<2>::sphere(1.0);
    CutoffSpec c;
    c.gamma0 = ParamBox{{-1}, {1}};
    c.gamma = ParamBox{{-1.5}, {1.5}};
    EXPECT_EQ(chi(c, s, {0.3}), 1.0);
    EXPECT_EQ(chi(c, s, {2.0}), 0.0);
    EXPECT_NEAR(chi(c, s, {1.1}), quintic(0.4 / 0.5), 1e-15);
    EXPECT_NEAR(chi(c, s, {-1.4}), quintic(0.1 / 0.5), 1e-15);
    // periodic chart: 2 pi - 1.4 is the same point as -1.4
    EXPECT_NEAR(chi(c, s, {2 * kPi - 1.4}), quintic(0.1 / 0.5), 1e-12);

    CutoffSpec t;
    t.R = 2;
    t.eps = 0.5;
    EXPECT_EQ(eta(t, 2.0), 1.0);
    EXPECT_EQ(eta(t, 2.5), 0.0);
    EXPECT_NEAR(eta(t, 2.1), 1 - quintic(0.2), 1e-15);
    double prev = 1;
    for (double r = 2; r <= 2.5; r += 0.01) {
        EXPECT_LE(eta(t, r), prev + 1e-15);
        prev = eta(t, r);
    }
}

TEST(Cutoffs, ValidationRejectsInconsistentSets) {
    CutoffSpec c;
    c.gamma0 = ParamBox{{-1}, {1}};
    c.gamma = ParamBox{{-0.5}, {1.5}};
    EXPECT_THROW(c.validate(), ArgumentError);
    CutoffSpec d;
    d.R = -1;
    EXPECT_THROW(d.validate(), ArgumentError);
    CutoffSpec e;
    e.gamma = ParamBox{{-1}, {1}};
    EXPECT_THROW(e.validate(), ArgumentError);
}

TEST(ClassifyCovector, FullDataBothSides) {
    auto const s = Surface<2>::ellipsoid({1, 2});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.4, 0.4), a(0, 2 * kPi);
    for (int i = 0; i < 200; ++i) {
        double const t = a(rng);
        auto const p = classify_covector(Vec<2>{{u(rng), u(rng)}}, Vec<2>{{std::cos(t), std::sin(t)}}, s,
                                         CutoffSpec::full());
        EXPECT_TRUE(p.in_plus && p.in_minus && p.in_visible);
        EXPECT_EQ(p.sigma0, 1.0);
    }
}

TEST(ClassifyCovector, RightHalfCircle) {
    auto const s = Surface<2>::sphere(1.0);
    auto const p = classify_covector(Vec<2>{}, Vec<2>{{1, 0}}, s, half_circle());
    EXPECT_TRUE(p.in_plus);
    EXPECT_FALSE(p.in_minus);
    EXPECT_TRUE(p.in_visible);
    EXPECT_DOUBLE_EQ(p.sigma0, 0.5);
    auto const q = classify_covector(Vec<2>{}, Vec<2>{{-1, 0}}, s, half_circle());
    EXPECT_EQ(q.in_plus, p.in_minus);
    EXPECT_EQ(q.in_minus, p.in_plus);
}

TEST(ClassifyCovector, ShortRadiusSeesNothing) {
    auto const s = Surface<2>::sphere(1.0);
    CutoffSpec c;
    c.R = 0.5;
    for (int k = 0; k < 16; ++k) {
        double const t = 2 * kPi * k / 16;
        auto const p = classify_covector(Vec<2>{{0.1, 0}}, Vec<2>{{std::cos(t), std::sin(t)}}, s, c);
        EXPECT_FALSE(p.in_visible);
        EXPECT_EQ(p.sigma0, 0.0);
    }
    CutoffSpec edge;
    edge.R = 1.0;
    EXPECT_TRUE(classify_covector(Vec<2>{}, Vec<2>{{1, 0}}, s, edge).in_plus);
}

TEST(ClassifyCovector, NegatedDirectionSwapsSides) {
    auto const s = Surface<2>::ellipsoid({1, 2});
    CutoffSpec c;
    c.gamma0 = ParamBox{{-1.0}, {2.0}};
    c.R = 1.2;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.4, 0.4), a(0, 2 * kPi);
    for (int i = 0; i < 300; ++i) {
        Vec<2> const x{{u(rng), u(rng)}};
        double const t = a(rng);
        Vec<2> const xi{{std::cos(t), std::sin(t)}};
        auto const p = classify_covector(x, xi, s, c), q = classify_covector(x, -1.0 * xi, s, c);
        EXPECT_EQ(p.in_plus, q.in_minus);
        EXPECT_EQ(p.in_minus, q.in_plus);
        EXPECT_GE(p.sigma0, 0.0);
        EXPECT_LE(p.sigma0, 1.0);
        EXPECT_EQ(p.sigma0 > 0, p.in_visible);
        if (p.in_plus && p.in_minus) {
            EXPECT_EQ(p.sigma0, 1.0);
        }
    }
}

TEST(PrincipalSymbol, PlaneOutsideGammaIsZero) {
    auto const s = Surface<2>::hyperplane();
    CutoffSpec c;
    c.gamma0 = ParamBox{{-1}, {1}};
    EXPECT_EQ(principal_symbol(Vec<2>{{0, 1}}, Vec<2>{{3, -1}}, s, c), 0.0);
    EXPECT_EQ(principal_symbol(Vec<2>{{0, 1}}, Vec<2>{{0.5, -1}}, s, c), 1.0);
    EXPECT_EQ(principal_symbol(Vec<2>{{0, 1}}, Vec<2>{{1, 1}}, s, CutoffSpec::full()), 1.0);
    EXPECT_THROW(principal_symbol(Vec<2>{{0, 1}}, Vec<2>{{1, 0}}, s, c), TangentialDirection);
}

TEST(VisibleZone, FullHalfAndEmpty) {
    auto const s = Surface<2>::sphere(1.0);
    auto const grid = GridSpec<2>::cube(Vec<2>{}, 0.6, 20);
    auto const dirs = probe_directions<2>(8);
    auto const full = visible_zone_mask(grid, dirs, s, CutoffSpec::full(), 2);
    for (auto b : full.bits) EXPECT_EQ(b, kInPlus | kInMinus);

    CutoffSpec none;
    none.R = 0;
    for (auto b : visible_zone_mask(grid, dirs, s, none).bits) EXPECT_EQ(b & (kInPlus | kInMinus), 0);

    std::vector<Vec<2>> const e1{Vec<2>{{1, 0}}};
    auto const half = visible_zone_mask(grid, e1, s, half_circle(), 3);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    for (int i = 0; i < 100; ++i) {
        auto const cell = pick(rng);
        auto const p = classify_covector(grid.cell_center(cell), e1[0], s, half_circle());
        auto const b = half.bits[half.index(cell, 0)];
        EXPECT_EQ((b & kInPlus) != 0, p.in_plus);
        EXPECT_EQ((b & kInMinus) != 0, p.in_minus);
        EXPECT_EQ(half.sigma0[half.index(cell, 0)], p.sigma0);
    }
}

TEST(VisibleZone, TangentialDirectionsAreFlagged) {
    auto const s = Surface<2>::hyperplane();
    GridSpec<2> const g{Vec<2>{{-1, 0.5}}, Vec<2>{{1, 1.5}}, {4, 4}};
    auto const vz = visible_zone_mask(g, std::vector<Vec<2>>{Vec<2>{{1, 0}}}, s, CutoffSpec::full());
    for (auto b : vz.bits) EXPECT_EQ(b, kTangential);
}

TEST(Jk, UnitCircleAtCenter) {
    auto const s = Surface<2>::sphere(1.0);
    for (Vec<2> xi : {Vec<2>{{1, 0}}, Vec<2>{{0.3, -2}}, Vec<2>{{-1.5, 0.7}}}) {
        EXPECT_NEAR(jk_direct(s, Vec<2>{}, xi, 1), 0.0, 1e-14);
        EXPECT_NEAR(jk_direct(s, Vec<2>{}, xi, 2), 2 * dot(xi, xi), 1e-12);
        EXPECT_NEAR(jk_closed_form(s, Vec<2>{}, xi, 2), 2 * dot(xi, xi), 1e-12);
    }
}

TEST(Jk, EllipseClosedFormMatchesDirect) {
    auto const s = Surface<2>::ellipsoid({1, 2});
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::normal_distribution<double> g;
    int checked = 0;
    while (checked < 200) {
        Vec<2> const x{{u(rng), 0.5 * u(rng)}};
        if (!contains(s, x)) continue;
        Vec<2> const xi{{g(rng), g(rng)}};
        for (int k = 1; k <= 4; ++k) {
            double const d = jk_direct(s, x, xi, k);
            EXPECT_NEAR(jk_closed_form(s, x, xi, k), d, 1e-10 * (1 + std::abs(d)));
        }
        ++checked;
    }
    EXPECT_THROW(jk_direct(Surface<2>::hyperplane(), Vec<2>{{0, 1}}, Vec<2>{{0, 1}}, 1), Unsupported);
}

TEST(LaplacianFd, Examples) {
    std::function<double(Vec<2> const&)> sq = [](Vec<2> const& v) { return dot(v, v); };
    EXPECT_NEAR(laplacian_power_fd<2>(sq, Vec<2>{{0.3, 1.2}}, 1, 0.1), 4.0, 1e-6);
    std::function<double(Vec<3> const&)> sq3 = [](Vec<3> const& v) { return dot(v, v); };
    EXPECT_NEAR(laplacian_power_fd<3>(sq3, Vec<3>{{0.3, 1.2, -1}}, 1, 0.1), 6.0, 1e-6);
    std::function<double(Vec<2> const&)> lin = [](Vec<2> const& v) { return 3 * v[0] - 2 * v[1] + 5; };
    for (int k = 1; k <= 3; ++k) EXPECT_NEAR(laplacian_power_fd<2>(lin, Vec<2>{{0.7, -0.4}}, k, 1.0), 0.0, 1e-8);
    std::function<double(Vec<2> const&)> quart = [](Vec<2> const& v) { return dot(v, v) * dot(v, v); };
    EXPECT_NEAR(laplacian_power_fd<2>(quart, Vec<2>{{0.5, -0.25}}, 2, 0.1), 64.0, 1e-4);
    EXPECT_THROW(laplacian_power_fd<2>(sq, Vec<2>{{1, 0}}, 1, 1e-12), ArgumentError);
}

TEST(JkPolynomial, EllipseExamples) {
    EXPECT_TRUE(jk_polynomial_expand(Surface<2>::ellipsoid({1, 2}), Vec<2>{}, 1).is_zero());
    auto const p = jk_polynomial_expand(Surface<2>::ellipsoid({1, 1}), Vec<2>{}, 2);
    EXPECT_EQ(p.degree(), 2);
    EXPECT_NEAR(p.coefficient({2, 0}), 2.0, 1e-14);
    EXPECT_NEAR(p.coefficient({0, 2}), 2.0, 1e-14);
    EXPECT_NEAR(p.coefficient({1, 1}), 0.0, 1e-14);
    EXPECT_EQ(p.terms().size(), 2u);
    EXPECT_THROW(jk_polynomial_expand(Surface<2>::ellipsoid({1, 1}), Vec<2>{{2, 0}}, 2), DomainError);
}

TEST(JkPolynomial, ParaboloidMatchesLeastSquaresFit) {
    auto const s = Surface<2>::paraboloid({1.0});
    Vec<2> const x{{0, 1}};
    int const k = 3;
    auto const poly = jk_polynomial_expand(s, x, k);
    EXPECT_LE(poly.degree(), k);

    // oracle: fit all monomials of degree <= 3 to direct J_3 samples at 20 probe directions
    std::vector<std::array<int, 2>> monos;
    for (int d = 0; d <= k; ++d)
        for (int a = d; a >= 0; --a) monos.push_back({a, d - a});
    Eigen::MatrixXd A(20, static_cast<Eigen::Index>(monos.size()));
    Eigen::VectorXd b(20);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    for (int row = 0; row < 20; ++row) {
        Vec<2> xi{{g(rng), g(rng)}};
        if (std::abs(xi[0]) < 0.2) xi[0] += 0.5;
        for (std::size_t c = 0; c < monos.size(); ++c)
            A(row, static_cast<Eigen::Index>(c)) = std::pow(xi[0], monos[c][0]) * std::pow(xi[1], monos[c][1]);
        b(row) = jk_direct(s, x, xi, k);
    }
    Eigen::VectorXd const coef = A.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < monos.size(); ++c)
        EXPECT_NEAR(poly.coefficient(monos[c]), coef(static_cast<Eigen::Index>(c)), 1e-8)
            << monos[c][0] << "," << monos[c][1];
}

TEST(JkPolynomial, RandomQuadricsStayWithinDegree) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1, 1), w(0.5, 2);
    int triples = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Surface<3> s = trial % 3 == 0   ? Surface<3>::ellipsoid({w(rng), w(rng), w(rng)})
                       : trial % 3 == 1 ? Surface<3>::paraboloid({w(rng), w(rng)})
                                        : Surface<3>::quadric({w(rng), w(rng), w(rng), w(rng)}, 2);
        Vec<3> x;
        do {
            x = Vec<3>{{u(rng), u(rng), 2 * u(rng) + 1}};
        } while (!contains(s, x));
        int const k = 1 + trial % 4;
        auto const p = jk_polynomial_expand(s, x, k);
        EXPECT_LE(p.degree(), k);
        EXPECT_TRUE(p.laplacian_power(k).is_zero());
        ++triples;
    }
    EXPECT_GE(triples, 50);
}

TEST(JkPolynomial, PlaneCorrectionSymbolsVanish) {
    auto const s = Surface<3>::hyperplane();
    for (int k = 1; k <= 5; ++k) {
        auto const p = jk_polynomial_expand(s, Vec<3>{{0, 0, 1}}, k);
        EXPECT_EQ(p.degree(), k);
        EXPECT_TRUE(p.laplacian_power(k).is_zero());
    }
}

TEST(PartialSymbol, FullDataQuadricIsOne) {
    std::vector<std::pair<Surface<2>, Vec<2>>> cases{{Surface<2>::ellipsoid({1, 2}), Vec<2>{{0.2, -0.1}}},
                                                     {Surface<2>::paraboloid({1}), Vec<2>{{0.1, 1.0}}},
                                                     {Surface<2>::quadric({1, 0.7, 0.3}, 1), Vec<2>{{0.1, 0.2}}}};
    for (auto const& [s, x] : cases) {
        auto const rep = partial_symbol_probe(x, Vec<2>{{3.5, 1.5}}, 4, s, CutoffSpec::full());
        EXPECT_TRUE(rep.both_sides);
        ASSERT_EQ(rep.terms.size(), 4u);
        for (auto const& t : rep.terms) {
            EXPECT_LT(std::abs(t.fd_laplacian), 1e-6) << to_string(s.kind()) << " k=" << t.k;
            EXPECT_EQ(t.exact_laplacian, 0.0);
            EXPECT_LE(t.degree, t.k);
        }
        EXPECT_NEAR(rep.symbol.real(), 1.0, 1e-6);
        EXPECT_NEAR(rep.symbol.imag(), 0.0, 1e-6);
    }
}

TEST(PartialSymbol, InvisibleAndHalfVisibleProbes) {
    auto const s = Surface<2>::sphere(1.0);
    CutoffSpec none;
    none.R = 0.1;
    auto const out = partial_symbol_probe(Vec<2>{}, Vec<2>{{1, 0}}, 1, s, none);
    EXPECT_FALSE(out.probe.in_visible);
    EXPECT_EQ(out.probe.sigma0, 0.0);
    auto const half = partial_symbol_probe(Vec<2>{}, Vec<2>{{1, 0}}, 0, s, half_circle());
    EXPECT_DOUBLE_EQ(half.probe.sigma0, 0.5);
    EXPECT_FALSE(half.both_sides);
    EXPECT_DOUBLE_EQ(half.symbol.real(), 0.5);
}
