#include <random>

#include <gtest/gtest.h>

#include "sradon/forward.hpp"
#include "sradon/phantom.hpp"

using namespace sradon;

namespace {

Phantom<2> ball2(Vec<2> c, double rho, double a = 1.0) { return {{indicator_ball(c, rho, a)}}; }

// Trapezoid rule on the full circle with many nodes: independent of the cap quadrature.
double circle_trapezoid(Phantom<2> const& f, Vec<2> z, double r, int m) {
    double s = 0;
    for (int k = 0; k < m; ++k) {
        double const t = 2 * std::numbers::pi * k / m;
        s += f.eval(z + r * Vec<2>{{std::cos(t), std::sin(t)}});
    }
    return s * 2 * std::numbers::pi * r / m;
}

}  // namespace

TEST(PhantomEval, IndicatorInsideOutside) {
    auto const f = ball2(Vec<2>{}, 0.3);
    EXPECT_EQ(f.eval(Vec<2>{{0.1, 0}}), 1.0);
    EXPECT_EQ(f.eval(Vec<2>{{0.5, 0}}), 0.0);
    EXPECT_EQ(f.eval(Vec<2>{{0.3, 0}}), 0.0);
}

TEST(PhantomEval, SmoothBumpFormula) {
    Phantom<2> f{{smooth_bump(Vec<2>{}, 0.5, 2.0, 2.0)}};
    EXPECT_NEAR(f.eval(Vec<2>{{0.25, 0}}), 2 * std::pow(1 - 0.25, 2), 1e-15);
    EXPECT_EQ(f.eval(Vec<2>{{0.6, 0}}), 0.0);
}

TEST(PhantomEval, LinearInAmplitudes) {
    Vec<2> const x{{0.05, 0.02}};
    Phantom<2> a{{smooth_bump(Vec<2>{}, 0.5, 1.5)}};
    Phantom<2> b{{smooth_bump(Vec<2>{}, 0.5, 3.0)}};
    EXPECT_NEAR(b.eval(x), 2 * a.eval(x), 1e-15);
}

TEST(Rasterize, ZeroPhantomIsZero) {
    auto const img = rasterize(Phantom<2>{}, GridSpec<2>::cube(Vec<2>{}, 1, 16));
    for (double v : img.values) EXPECT_EQ(v, 0.0);
}

TEST(Rasterize, DiskAreaWithinTwoPercent) {
    double const rho = 0.3;
    auto const g = GridSpec<2>::cube(Vec<2>{}, 0.5, 256);
    auto const img = rasterize(ball2(Vec<2>{}, rho), g);
    double sum = 0;
    for (double v : img.values) sum += v;
    EXPECT_NEAR(sum * g.cell_volume(), std::numbers::pi * rho * rho, 0.02 * std::numbers::pi * rho * rho);
}

TEST(Rasterize, DisjointBumpsAdd) {
    auto const g = GridSpec<2>::cube(Vec<2>{}, 1, 64);
    Phantom<2> a{{smooth_bump(Vec<2>{{-0.5, 0}}, 0.3)}}, b{{smooth_bump(Vec<2>{{0.5, 0}}, 0.3)}};
    auto const both = rasterize(a + b, g), ra = rasterize(a, g), rb = rasterize(b, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(both[i], ra[i] + rb[i]);
}

TEST(SupportInside, ChecksEveryPrimitive) {
    auto const s = Surface<2>::sphere(1.0);
    EXPECT_TRUE(support_inside(ball2(Vec<2>{{0.5, 0}}, 0.4), s));
    EXPECT_FALSE(support_inside(ball2(Vec<2>{{0.5, 0}}, 0.5), s));
    EXPECT_FALSE(support_inside(ball2(Vec<2>{{0, 0.2}}, 0.3), Surface<2>::hyperplane()));
}

TEST(SphereIntegral, ConstantOnEnclosingBall) {
    double const r = 0.7;
    EXPECT_NEAR(sphere_integral(ball2(Vec<2>{}, 5), Vec<2>{{0.2, 0.1}}, r), 2 * std::numbers::pi * r, 1e-8);
    Phantom<3> f3{{indicator_ball(Vec<3>{}, 5.0)}};
    EXPECT_NEAR(sphere_integral(f3, Vec<3>{{0.2, 0.1, 0}}, r), 4 * std::numbers::pi * r * r, 1e-8);
}

TEST(SphereIntegral, DisjointSphereIsZero) {
    EXPECT_EQ(sphere_integral(ball2(Vec<2>{}, 0.3), Vec<2>{{2, 0}}, 0.5), 0.0);
}

TEST(SphereIntegral, ArcLengthMatchesMonteCarlo) {
    auto const f = ball2(Vec<2>{}, 0.3);
    Vec<2> const z{{1, 0}};
    double const q = sphere_integral(f, z, 0.9);
    auto const mc = mc_sphere_integral(f, z, 0.9, 200000, 5);
    EXPECT_LE(std::abs(q - mc.estimate), 3 * mc.standard_error);
}

TEST(SphereIntegral, SmoothBumpMatchesFullCircleTrapezoid) {
    Phantom<2> f{{smooth_bump(Vec<2>{{0.3, 0.1}}, 0.4, 1.0, 3.0)}};
    Vec<2> const z{{1.5, 0}};
    for (double r : {0.9, 1.2, 1.5}) EXPECT_NEAR(sphere_integral(f, z, r), circle_trapezoid(f, z, r, 200000), 1e-9);
}

TEST(SphereIntegral, SmallRadiusLimit) {
    Phantom<3> f{{smooth_bump(Vec<3>{}, 0.5, 1.0, 3.0)}};
    Vec<3> const z{{0.1, 0.05, -0.1}};
    double const r = 1e-3;
    EXPECT_NEAR(sphere_integral(f, z, r) / sphere_area<3>(r), f.eval(z), 0.01 * f.eval(z));
}

TEST(SphereIntegral, MinimumNodeCountAlreadyConverged) {
    Phantom<2> f{{smooth_bump(Vec<2>{{0.3, 0.1}}, 0.4, 1.0, 6.0)}};
    Vec<2> const z{{1.5, 0}};
    EXPECT_NEAR(sphere_integral(f, z, 1.3, 16), circle_trapezoid(f, z, 1.3, 200000), 1e-9);
}

TEST(SphereIntegral, RejectsBadArguments) {
    auto const f = ball2(Vec<2>{}, 0.3);
    EXPECT_THROW(sphere_integral(f, Vec<2>{}, 0.0), ArgumentError);
    EXPECT_THROW(sphere_integral(f, Vec<2>{}, 1.0, 8), ArgumentError);
}

TEST(MonteCarlo, ConstantAndZero) {
    auto const one = mc_sphere_integral(ball2(Vec<2>{}, 10), Vec<2>{}, 1.3, 10000, 1);
    EXPECT_NEAR(one.estimate, 2 * std::numbers::pi * 1.3, 1e-12);
    EXPECT_EQ(mc_sphere_integral(Phantom<2>{}, Vec<2>{}, 1.0, 10000, 1).estimate, 0.0);
}

TEST(MonteCarlo, HalfCoveredSphereIn3D) {
    // Large ball whose boundary passes through the sphere center: covers the cap u > r / (2 R).
    double const big = 1000, r = 1.0;
    Phantom<3> f{{indicator_ball(Vec<3>{{0, 0, big}}, big)}};
    auto const mc = mc_sphere_integral(f, Vec<3>{}, r, 400000, 9);
    double const cap = 2 * std::numbers::pi * r * r * (1 - r / (2 * big));
    EXPECT_LE(std::abs(mc.estimate - cap), 3 * mc.standard_error);
    EXPECT_NEAR(sphere_integral(f, Vec<3>{}, r), cap, 1e-9);
}

TEST(MonteCarlo, ReproducibleForSeed) {
    auto const f = ball2(Vec<2>{}, 0.3);
    auto const a = mc_sphere_integral(f, Vec<2>{{1, 0}}, 0.9, 10000, 42);
    auto const b = mc_sphere_integral(f, Vec<2>{{1, 0}}, 0.9, 10000, 42);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_THROW(mc_sphere_integral(f, Vec<2>{}, 0.9, 100, 1), ArgumentError);
}

TEST(ForwardSinogram, ZeroLinearAndSymmetric) {
    auto const s = Surface<2>::sphere(1.5);
    auto const q = surface_quadrature(s, s.default_patch(), {32});
    auto const radii = radius_grid(3.0, 64);
    auto const zero = forward_sinogram(Phantom<2>{}, s, q, radii);
    for (double v : zero.data) EXPECT_EQ(v, 0.0);

    Phantom<2> a{{smooth_bump(Vec<2>{{0.2, 0.1}}, 0.3)}}, b{{indicator_ball(Vec<2>{{-0.3, 0}}, 0.2)}};
    auto const sa = forward_sinogram(a, s, q, radii), sb = forward_sinogram(b, s, q, radii);
    auto const sab = forward_sinogram(a + b, s, q, radii);
    for (std::size_t i = 0; i < sab.data.size(); ++i) EXPECT_NEAR(sab.data[i], sa.data[i] + sb.data[i], 1e-12);

    Phantom<2> c{{smooth_bump(Vec<2>{}, 0.5)}};
    auto const sc = forward_sinogram(c, s, q, radii);
    for (std::size_t j = 1; j < sc.num_centers(); ++j)
        for (std::size_t i = 0; i < radii.count; ++i) EXPECT_NEAR(sc.at(j, i), sc.at(0, i), 1e-10);
}

TEST(ForwardSinogram, SupportOutsideOmegaIsDomainError) {
    auto const s = Surface<2>::sphere(1.0);
    auto const q = surface_quadrature(s, s.default_patch(), {16});
    EXPECT_THROW(forward_sinogram(ball2(Vec<2>{{0.9, 0}}, 0.3), s, q, radius_grid(2, 16)), DomainError);
}

TEST(ForwardSinogram, WorkerCountDoesNotChangeData) {
    auto const s = Surface<2>::sphere(1.5);
    auto const q = surface_quadrature(s, s.default_patch(), {24});
    Phantom<2> f{{smooth_bump(Vec<2>{{0.2, 0.1}}, 0.3)}};
    auto const a = forward_sinogram(f, s, q, radius_grid(3.0, 40), {64, 1});
    auto const b = forward_sinogram(f, s, q, radius_grid(3.0, 40), {64, 4});
    EXPECT_EQ(a.data, b.data);
}

TEST(ForwardSinogram, GaussianNoiseIsSeeded) {
    auto const s = Surface<2>::sphere(1.5);
    auto const q = surface_quadrature(s, s.default_patch(), {8});
    auto a = forward_sinogram(Phantom<2>{}, s, q, radius_grid(3.0, 10));
    auto b = a;
    add_gaussian_noise(a, 0.1, 3);
    add_gaussian_noise(b, 0.1, 3);
    EXPECT_EQ(a.data, b.data);
    EXPECT_THROW(add_gaussian_noise(a, -1.0, 3), ArgumentError);
}
