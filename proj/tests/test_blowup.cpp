#include <gtest/gtest.h>

#include <cmath>

#include <kirchhoff/blowup.hpp>

using namespace kirchhoff;

TEST(Blowup, ScaleAndAsymptoticEnergy)
{
    // r_p = (βp/(β_p p*))^{p*/(p*-p)}
    EXPECT_NEAR(r_p(1.0 * 8 / 4, 1.0, 4, 1), 1.0, 1e-14);
    EXPECT_NEAR(r_p(4, 1, 4, 1), 4.0, 1e-12);
    EXPECT_NEAR(d_asymptotic(1, 4, 1, 4, 1), -1.0, 1e-12);
    double prev = 0;
    for (double p : {4.5, 5.0, 6.0, 7.0}) {
        const double r = r_p(3, 1, p, 1);
        EXPECT_GT(r, prev);
        prev = r;
        EXPECT_LT(d_asymptotic(1, 3, 1, p, 1), 0);
    }
    EXPECT_THROW(r_p(1, 1, 8, 1), DomainError);
}

TEST(Blowup, ConcentrationCenter)
{
    auto g = build_grid({1, GridKind::FullLine1D, 10, 2001});
    auto u = sample(g, [](double x) { return std::exp(-(x - 1.5) * (x - 1.5)) * (1 + 0.1 * (x - 1.5) * (x - 1.5)); });
    EXPECT_NEAR(concentration_center(*g, u), 1.5, 1e-8);
    auto rg = build_grid({2, GridKind::RadialHalfLine, 10, 101});
    EXPECT_EQ(concentration_center(*rg, sample(rg, [](double r) { return std::exp(-r); })), 0.0);
    EXPECT_THROW(concentration_center(*g, Field(g)), DomainError);
}

TEST(Blowup, RescaleMinimizer)
{
    auto g = build_grid({1, GridKind::FullLine1D, 20, 8001});
    auto u = project_sphere(*g, sample(g, [](double x) { return std::exp(-2 * (x - 0.5) * (x - 0.5)); }));
    auto same = rescale_minimizer(*g, u, 1.0, 0.0, g);
    for (std::size_t i = 0; i < u.size(); ++i)
        EXPECT_NEAR(same[i], u[i], 1e-14);
    auto ref = build_grid({1, GridKind::FullLine1D, 12, 4001});
    for (double eps : {0.5, 0.25}) {
        auto w = rescale_minimizer(*g, u, eps, 0.5, ref);
        EXPECT_NEAR(mass(w), 1.0, 1e-4) << eps;
        EXPECT_NEAR(grad_sq(w) / (eps * eps * grad_sq(u)), 1.0, 1e-3) << eps;
        EXPECT_NEAR(concentration_center(*ref, w), 0.0, 1e-8);
    }
    EXPECT_THROW(rescale_minimizer(*g, u, 0.05, 0.5, ref), ResolutionError);
    EXPECT_THROW(rescale_minimizer(*g, u, -1.0, 0.5, ref), DomainError);
}

TEST(Blowup, ProfileDistance)
{
    auto gs = shoot_ground_state(1, 8, 1e-4);
    auto g = build_grid({1, GridKind::FullLine1D, 15, 6001});
    auto w = unit_ground_state(g, gs);
    EXPECT_LT(profile_distance(w, gs).l2, 1e-4);
    double prev = 1e9;
    for (double t : {1.3, 1.1, 1.02}) {
        const auto d = profile_distance(unit_ground_state(g, gs, t), gs);
        EXPECT_GT(d.l2, 1e-4);
        EXPECT_GE(d.h1, d.l2);
        EXPECT_LT(d.l2, prev);
        prev = d.l2;
    }
}

TEST(Blowup, SweepSpecValidation)
{
    SweepSpec s;
    s.deltas = {4.5};
    EXPECT_THROW(s.validate(), ConfigError);
    s.deltas = {0.5};
    s.N = 4;
    EXPECT_THROW(s.validate(), ConfigError);
    s.N = 1;
    s.beta = -1;
    EXPECT_THROW(s.validate(), ConfigError);
    s.beta = 1;
    EXPECT_NO_THROW(s.validate());
}

TEST(Blowup, FreeSweepScalingIdentities)
{
    // V = 0, N = 1: in the limit T_w -> 1, λε⁴ -> -3b/2 and d/d_asym -> 1
    auto gstar = shoot_ground_state(1, 8, 1e-4);
    SweepSpec s;
    s.beta = 2 * beta_p(1, gstar);
    s.V = Potential::zero();
    s.deltas = {0.5, 0.2, 0.05};
    s.w_extent = 24;
    s.w_nodes = 2049;
    auto rs = run_sweep(s);
    ASSERT_EQ(rs.size(), 3u);
    for (const auto& r : rs) {
        EXPECT_EQ(r.status, Status::Converged) << r.delta;
        EXPECT_NEAR(r.p, 8 - r.delta, 1e-14);
        EXPECT_NEAR(r.eps_p * std::pow(r.r_p, 0.25), 1.0, 1e-12);
        EXPECT_NEAR(r.beta_scaled, r.beta_p * 8 / r.p, 1e-9 * r.beta_scaled);
        EXPECT_LT(r.d_measured, 0);
        // decay of the rescaled profile: at least 90% of √((4-N)/(4N))
        Interpolant f(r.field);
        const double x1 = 6, x2 = 10;
        const double slope = (std::log(f(x2)) - std::log(f(x1))) / (x2 - x1);
        EXPECT_LE(slope, -0.9 * std::sqrt(3.0 / 4.0)) << r.delta;
    }
    for (std::size_t k = 1; k < rs.size(); ++k) {
        EXPECT_NEAR(rs[k].ratio_d, 1.0, 1e-3) << rs[k].delta;
        EXPECT_NEAR(rs[k].T_sq_over_rp, 1.0, 1e-3) << rs[k].delta;
        EXPECT_LT(rs[k].profile_dist, rs[k - 1].profile_dist);
    }
    EXPECT_NEAR(rs.back().lambda_eps4, -1.5, 0.01);
}
