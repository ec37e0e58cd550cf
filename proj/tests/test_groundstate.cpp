#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <kirchhoff/energy.hpp>
#include <kirchhoff/groundstate.hpp>

using namespace kirchhoff;

namespace {

// ((p+2)(4+p)/8)^{1/p} sech^{2/p}(x √((4+p)/p) p/2)
double closed(double p, double x)
{
    return std::pow((p + 2) * (4 + p) / 8, 1 / p) * std::pow(1 / std::cosh(x * std::sqrt((4 + p) / p) * p / 2), 2 / p);
}

// Townes profile by fixed-step RK4 shooting on Q'' + Q'/r = Q - Q³; returns ∫Q² dx over R².
double townes_mass(double h)
{
    auto rhs = [](double r, double q, double d, double& dq, double& dd) {
        dq = d;
        dd = q - q * q * q - d / r;
    };
    auto shoot = [&](double alpha, bool integrate, double& m) {
        double r = 1e-6, q = alpha + (alpha - alpha * alpha * alpha) * r * r / 4, d = (alpha - alpha * alpha * alpha) * r / 2;
        m = 0;
        while (r < 12) {
            double k1q, k1d, k2q, k2d, k3q, k3d, k4q, k4d;
            rhs(r, q, d, k1q, k1d);
            rhs(r + h / 2, q + h / 2 * k1q, d + h / 2 * k1d, k2q, k2d);
            rhs(r + h / 2, q + h / 2 * k2q, d + h / 2 * k2d, k3q, k3d);
            rhs(r + h, q + h * k3q, d + h * k3d, k4q, k4d);
            const double qn = q + h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
            const double dn = d + h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
            if (integrate)
                m += 0.5 * h * (2 * std::numbers::pi) * (r * q * q + (r + h) * qn * qn);
            r += h;
            q = qn;
            d = dn;
            if (q < 0)
                return 1;       // overshoot
            if (d > 0)
                return -1;      // undershoot
        }
        return 0;
    };
    double lo = 2, hi = 2.5, m = 0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shoot(mid, false, m) > 0 ? hi : lo) = mid;
    }
    shoot(lo, true, m);
    return m;
}

} // namespace

TEST(ClosedForm, SatisfiesOdeBySubstitution)
{
    // −(p/4)u″ + (1 + p/4)u − u^{p+1} = 0, second derivative by a fine central difference
    for (double p : {1.0, 2.0, 4.0, 6.0, 7.5}) {
        const double e = 1e-4;
        for (double x : {0.0, 0.3, 0.9, 2.0, 3.5}) {
            const double u = closed(p, x);
            const double upp = (closed(p, x + e) - 2 * u + closed(p, x - e)) / (e * e);
            EXPECT_NEAR(-(p / 4) * upp + (1 + p / 4) * u - std::pow(u, p + 1), 0.0, 1e-6) << p << " " << x;
        }
    }
    EXPECT_NEAR(closed(2, 0), std::sqrt(3.0), 1e-15);
}

TEST(ClosedForm, MatchesLibrary)
{
    for (double p : {1.0, 2.0, 4.0, 6.0}) {
        auto cf = closed_form_1d(1, p);
        for (double x = 0; x < 10; x += 0.37)
            EXPECT_NEAR(cf.eval(x), closed(p, x), 1e-9) << p << " " << x;
    }
    EXPECT_NEAR(closed_form_1d(1, 2).shoot_height, 1.7320508, 1e-7);
    EXPECT_THROW(closed_form_1d(2, 2), UsageError);
}

TEST(ClosedForm, DiscreteResidualIsSecondOrder)
{
    auto res = [](std::size_t M) {
        auto cf = closed_form_1d(1, 2, M);
        const auto& g = *cf.profile.grid;
        auto L = laplacian(g, cf.profile);
        double e = 0;
        for (std::size_t i = 0; i + 1 < cf.profile.size(); ++i) {
            const double u = cf.profile[i];
            e = std::max(e, std::abs(-0.5 * L[i] + 1.5 * u - u * u * u));
        }
        return e;
    };
    const double e1 = res(2048), e2 = res(4096);
    // leading truncation term (p/4)(h²/12) max|u|, with max|u| = 45√3 at x = 0
    const double h = closed_form_1d(1, 2, 2048).profile.grid->h();
    EXPECT_LT(e1, 1.05 * 0.5 * h * h / 12 * 45 * std::sqrt(3.0));
    EXPECT_GT(e1 / e2, 3.5);
}

TEST(GroundState, OneDimensionalSoliton)
{
    auto gs = shoot_ground_state(1, 2, 1e-6);
    const double s3 = std::sqrt(3.0);
    EXPECT_NEAR(gs.shoot_height, s3, 1e-8);
    EXPECT_NEAR(gs.l2_norm_sq / (2 * s3), 1.0, 1e-6);
    EXPECT_NEAR(gs.dirichlet / (2 * s3), 1.0, 1e-6);
    EXPECT_NEAR(gs.lp2_norm / (4 * s3), 1.0, 1e-6);
    for (double x = 0; x < 12; x += 0.1)
        EXPECT_NEAR(gs.eval(x), closed(2, x), 1e-6);
}

TEST(GroundState, MatchesClosedFormForSeveralExponents)
{
    for (double p : {1.0, 4.0, 6.0}) {
        auto gs = shoot_ground_state(1, p, 1e-6);
        double e = 0;
        for (double x = 0; x < 12; x += 0.01)
            e = std::max(e, std::abs(gs.eval(x) - closed(p, x)));
        EXPECT_LT(e, 1e-5) << p;
    }
}

TEST(GroundState, TownesMassAgainstIndependentShooting)
{
    const double m1 = townes_mass(2e-3), m2 = townes_mass(1e-3);
    const double oracle = (4 * m2 - m1) / 3;
    auto gs = shoot_ground_state(2, 2, 1e-4);
    EXPECT_NEAR(gs.l2_norm_sq / oracle, 1.0, 1e-2);
    EXPECT_NEAR(gs.l2_norm_sq, 11.70, 0.01 * 11.70);
}

TEST(GroundState, ResidualsWithinToleranceAndShrink)
{
    for (int N = 1; N <= 3; ++N)
        for (double p : {1.0, 2.0}) {
            auto gs = shoot_ground_state(N, p, 1e-4);
            EXPECT_LE(gs.pohozaev_res1, 1e-4);
            EXPECT_LE(gs.pohozaev_res2, 1e-4);
        }
    GroundStateOptions o;
    auto [lo, hi] = shooting_bracket(3, 2, o);
    auto a = profile_from_bracket(3, 2, lo, hi, 2048, o);
    auto b = profile_from_bracket(3, 2, lo, hi, 4096, o);
    EXPECT_GT(a.pohozaev_res1 / b.pohozaev_res1, 3.0);
    EXPECT_GT(a.pohozaev_res2 / b.pohozaev_res2, 3.0);
}

TEST(GroundState, PositiveDecreasingAndDecayRate)
{
    for (int N = 1; N <= 3; ++N) {
        const double p = 2;
        auto gs = shoot_ground_state(N, p, 1e-4);
        for (std::size_t i = 0; i + 1 < gs.profile.size() && gs.profile.grid->x(i + 1) < gs.r_splice; ++i) {
            ASSERT_GT(gs.profile[i], 0);
            ASSERT_GT(gs.profile[i], gs.profile[i + 1]);
        }
        const double s = std::sqrt((1 + 0.25 * p * (2 - N)) / (0.25 * N * p));
        const double r1 = 18 / s, r2 = 26 / s;
        const double slope = (std::log(gs.eval(r2)) - std::log(gs.eval(r1))) / (r2 - r1);
        EXPECT_NEAR(-slope / s, 1.0, 0.05) << N;
    }
}

TEST(GroundState, ExponentChecks)
{
    EXPECT_THROW(shoot_ground_state(3, 4, 1e-4), ConfigError);
    EXPECT_THROW(shoot_ground_state(1, -1, 1e-4), ConfigError);
    EXPECT_THROW(shoot_ground_state(1, 2, 0), ConfigError);
    GroundStateOptions o;
    o.M = 1024;
    o.M_max = 2048;
    EXPECT_THROW(shoot_ground_state(3, 2, 1e-12, o), AccuracyError);
}

TEST(GagliardoNirenberg, ConstantAndEquality)
{
    auto gs = shoot_ground_state(1, 2, 1e-6);
    EXPECT_NEAR(gn_constant(gs), 1 / std::sqrt(3.0), 1e-6);
    for (int N = 1; N <= 3; ++N) {
        auto g = shoot_ground_state(N, 1.5, 1e-4);
        EXPECT_NEAR(gn_ratio(*g.profile.grid, g.profile, g), 1.0, 1e-4) << N;
    }
}

TEST(GagliardoNirenberg, GaussianAndInvariances)
{
    auto gs = shoot_ground_state(1, 2, 1e-4);
    auto g = build_grid({1, GridKind::FullLine1D, 20, 4001});
    auto u = sample(g, [](double x) { return std::exp(-0.5 * x * x); });
    const double r = gn_ratio(*g, u, gs);
    EXPECT_GT(r, 0);
    EXPECT_LT(r, 1);
    Field u3 = u;
    for (auto& v : u3.v)
        v *= 3;
    EXPECT_NEAR(gn_ratio(*g, u3, gs), r, 1e-8);
    auto phi = unit_ground_state(g, gs, 2.0);
    EXPECT_NEAR(gn_ratio(*g, phi, gs), 1.0, 1e-3);
    EXPECT_THROW(gn_ratio(*g, Field(g), gs), DomainError);
}
