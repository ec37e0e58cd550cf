#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <kirchhoff/grid.hpp>

using namespace kirchhoff;

namespace {

GridPtr line(double R, std::size_t M) { return build_grid({1, GridKind::FullLine1D, R, M}); }
GridPtr radial(int N, double R, std::size_t M) { return build_grid({N, GridKind::RadialHalfLine, R, M}); }

} // namespace

TEST(Grid, ThreeNodeLineIsTrapezoid)
{
    auto g = line(10, 3);
    EXPECT_EQ(g->nodes(), (std::vector<double>{-10, 0, 10}));
    EXPECT_EQ(g->weights(), (std::vector<double>{5, 10, 5}));
    EXPECT_DOUBLE_EQ(g->h(), 10);
}

TEST(Grid, RejectsBadSpecs)
{
    EXPECT_THROW(build_grid({2, GridKind::FullLine1D, 10, 64}), ConfigError);
    EXPECT_THROW(build_grid({5, GridKind::RadialHalfLine, 10, 64}), ConfigError);
    EXPECT_THROW(build_grid({1, GridKind::FullLine1D, -1, 64}), ConfigError);
    EXPECT_THROW(build_grid({1, GridKind::FullLine1D, 1, 2}), ConfigError);
}

TEST(Grid, NodesIncreaseAndWeightsNonnegative)
{
    for (int N = 1; N <= 4; ++N) {
        auto g = radial(N, 7, 100);
        EXPECT_TRUE(std::is_sorted(g->nodes().begin(), g->nodes().end()));
        EXPECT_DOUBLE_EQ(g->x(99), 7.0);
        for (double w : g->weights())
            EXPECT_GE(w, 0.0);
    }
}

TEST(Grid, BallVolume)
{
    auto g = radial(3, 5, 2048);
    const double vol = integrate(*g, sample(g, [](double) { return 1.0; }));
    EXPECT_NEAR(vol / (4.0 / 3.0 * std::numbers::pi * 125.0), 1.0, 1e-6);
    for (int N : {1, 2, 4}) {
        auto gn = radial(N, 3, 2048);
        const double v = integrate(*gn, sample(gn, [](double) { return 1.0; }));
        EXPECT_NEAR(v / ball_volume(N, 3), 1.0, 1e-6) << N;
    }
}

TEST(Grid, OriginCellIsInnerDisk)
{
    // node-centred cells: the origin owns the disk of radius h/2 (not a zero weight)
    auto g = radial(2, 10, 101);
    EXPECT_NEAR(g->weights()[0], std::numbers::pi * 0.0025, 1e-15);
}

TEST(Grid, IntegrateZeroAndGaussian)
{
    auto g = radial(3, 8, 1024);
    EXPECT_EQ(integrate(*g, Field(g)), 0.0);
    const double I = integrate(*g, sample(g, [](double r) { return std::exp(-r * r); }));
    EXPECT_NEAR(I / std::pow(std::numbers::pi, 1.5), 1.0, 1e-6);
}

TEST(Grid, IntegrateHatAndLinear)
{
    auto g = line(4, 801);
    // unit-area hat on [-1, 1] with kinks on nodes
    EXPECT_NEAR(integrate(*g, sample(g, [](double x) { return std::max(0.0, 1 - std::abs(x)); })), 1.0, 1e-12);
    // trapezoid integrates linear functions exactly
    EXPECT_NEAR(integrate(*g, sample(g, [](double x) { return 3 * x + 2; })), 16.0, 1e-11);
}

TEST(Grid, MismatchedGridIsUsageError)
{
    auto a = line(4, 11), b = line(5, 11);
    EXPECT_THROW(integrate(*a, Field(b)), UsageError);
    EXPECT_THROW(Field(a, std::vector<double>(3)), UsageError);
}

TEST(Grid, GradSqOfConstantAndSoliton)
{
    auto g = line(20, 4096);
    EXPECT_EQ(grad_sq(*g, sample(g, [](double) { return 2.5; })), 0.0);
    const double s3 = std::sqrt(3.0);
    auto u = sample(g, [&](double x) { return s3 / std::cosh(s3 * x); });
    // ∫ 9 sech² tanh² (√3 x) dx = 2√3
    EXPECT_NEAR(grad_sq(*g, u) / (2 * s3), 1.0, 1e-4);
}

TEST(Grid, GradSqHomogeneity)
{
    auto g = radial(3, 6, 500);
    auto u = sample(g, [](double r) { return std::exp(-r * r) * (1 + r); });
    Field u2 = u;
    for (auto& v : u2.v)
        v *= 2;
    EXPECT_NEAR(grad_sq(u2) / grad_sq(u), 4.0, 1e-14);
    EXPECT_GE(grad_sq(u), 0.0);
}

TEST(Grid, LaplacianConstantAndQuadratic)
{
    auto g = line(3, 61);
    auto c = laplacian(*g, sample(g, [](double) { return 1.0; }));
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        EXPECT_NEAR(c[i], 0.0, 1e-12);
    auto q = laplacian(*g, sample(g, [](double x) { return x * x; }));
    for (std::size_t i = 1; i + 1 < q.size(); ++i)
        EXPECT_NEAR(q[i], 2.0, 1e-10);
}

TEST(Grid, LaplacianGaussianSecondOrder)
{
    for (int N = 1; N <= 4; ++N) {
        auto err = [&](std::size_t M) {
            auto g = radial(N, 8, M);
            auto L = laplacian(*g, sample(g, [](double r) { return std::exp(-0.5 * r * r); }));
            double e = 0;
            for (std::size_t i = 0; i < L.size(); ++i) {
                const double r = g->x(i);
                e = std::max(e, std::abs(L[i] - (r * r - N) * std::exp(-0.5 * r * r)));
            }
            return e;
        };
        const double e1 = err(201), e2 = err(401);
        EXPECT_LT(e1, 0.02) << N;
        EXPECT_GT(e1 / e2, 3.5) << N;
    }
}

TEST(Grid, LaplacianSelfAdjoint)
{
    auto g = radial(3, 12, 1201);
    auto u = sample(g, [](double r) { return std::exp(-r * r); });
    auto v = sample(g, [](double r) { return std::exp(-0.5 * (r - 1) * (r - 1)); });
    auto Lu = laplacian(*g, u), Lv = laplacian(*g, v);
    Field a(g), b(g);
    for (std::size_t i = 0; i < u.size(); ++i) {
        a[i] = Lu[i] * v[i];
        b[i] = Lv[i] * u[i];
    }
    EXPECT_NEAR(integrate(a), integrate(b), 1e-3 * std::abs(integrate(a)));
}

TEST(Grid, RearrangementFixedPoint)
{
    auto g = radial(2, 5, 300);
    auto u = sample(g, [](double r) { return std::exp(-r); });
    EXPECT_EQ(rearrange_decreasing(*g, u).v, u.v);
    auto l = line(5, 301);
    // built from |i - centre| so mirrored nodes hold bitwise equal values
    Field ul(l);
    for (std::size_t i = 0; i < ul.size(); ++i) {
        const double d = (double(i) - 150.0) / 30.0;
        ul[i] = 1 / (1 + d * d);
    }
    EXPECT_EQ(rearrange_decreasing(*l, ul).v, ul.v);
}

TEST(Grid, RearrangementTwoBumps)
{
    auto g = line(10, 2001);
    auto u = sample(g, [](double x) {
        return std::exp(-4 * (x - 4) * (x - 4)) + 0.5 * std::exp(-(x + 3) * (x + 3));
    });
    auto s = rearrange_decreasing(*g, u);
    // symmetric, single peak at the centre, values within the input range
    const auto [mn, mx] = std::minmax_element(u.v.begin(), u.v.end());
    EXPECT_NEAR(s[1000], *mx, 1e-3);
    for (std::size_t i = 1000; i + 1 < s.size(); ++i)
        EXPECT_GE(s[i], s[i + 1]);
    for (std::size_t i = 1; i <= 1000; ++i)
        EXPECT_LE(s[i - 1], s[i]);
    for (double v : s.v) {
        EXPECT_GE(v, *mn);
        EXPECT_LE(v, *mx);
    }
    EXPECT_NEAR(mass(s) / mass(u), 1.0, 1e-6);
    EXPECT_NEAR(lp_integral(s, 4) / lp_integral(u, 4), 1.0, 1e-6);
    EXPECT_LE(grad_sq(s), grad_sq(u) + 1e-8);
}

TEST(Grid, RearrangementRandomFields)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0, 1);
    // second-order remapping: 1e-6 needs h near 1e-3
    for (int N : {1, 2, 3}) {
        auto g = radial(N, 10, 8000);
        for (int k = 0; k < 5; ++k) {
            const double c1 = 8 * U(rng), c2 = 8 * U(rng), a = U(rng);
            auto u = sample(g, [&](double r) {
                return std::exp(-(r - c1) * (r - c1)) + a * std::exp(-2 * (r - c2) * (r - c2));
            });
            u[u.size() - 1] = 0;
            auto s = rearrange_decreasing(*g, u);
            EXPECT_NEAR(mass(s) / mass(u), 1.0, 1e-12);
            EXPECT_NEAR(lp_integral(s, 5) / lp_integral(u, 5), 1.0, 1e-6);
            EXPECT_LE(grad_sq(s), grad_sq(u) + 1e-8);
        }
    }
}

TEST(Grid, RearrangementRejectsNegative)
{
    auto g = line(1, 11);
    auto u = sample(g, [](double x) { return x; });
    EXPECT_THROW(rearrange_decreasing(*g, u), DomainError);
}

TEST(Grid, InterpolantAndCsv)
{
    auto g = radial(1, 4, 41);
    auto u = sample(g, [](double r) { return 1 - r / 4; });
    Interpolant f(u);
    EXPECT_NEAR(f(-1.05), 1 - 1.05 / 4, 1e-12);
    EXPECT_EQ(f(4.5), 0.0);
    std::ostringstream os;
    write_csv(os, u);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "coordinate,value");
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::getline(is, line);
        const auto c = line.find(',');
        EXPECT_EQ(std::stod(line.substr(0, c)), g->x(i));
        EXPECT_EQ(std::stod(line.substr(c + 1)), u[i]);
    }
}
