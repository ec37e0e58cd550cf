#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "groundstate.hpp"

namespace kirchhoff {

inline constexpr double exponent_tol = 1e-12;

inline bool near(double x, double y) { return std::abs(x - y) <= exponent_tol; }

inline double beta_tilde(int N, double p, double a, double b, const GroundStateProfile& gs)
{
    if (!(a > 0) || !(b > 0))
        throw ConfigError("a and b must be positive");
    const double lower = 4.0 / N, pstar = 8.0 / N;
    if (p >= pstar - exponent_tol)
        throw DomainError("beta_tilde is defined for p < 8/N only");
    if (near(p, lower))
        return a * std::pow(gs.l2_norm_sq, 2.0 / N);
    if (p < lower)
        return 0.0;
    const double e1 = (8 - N * p) / 4, e2 = (N * p - 4) / 4;
    return 2 * std::pow(gs.l2_norm_sq, 0.5 * p) * std::pow(2 * a / (8 - N * p), e1)
        * std::pow(b / (N * p - 4), e2);
}

inline double beta_p(double b, const GroundStateProfile& gs)
{
    return 0.5 * b * std::pow(gs.l2_norm_sq, 0.5 * gs.p);
}

struct SobolevReport {
    double S = 0;
    double grad_integral = 0;
    double quartic_integral = 0;
    double ratio = 0;
};

// Bubble U = 2√2/(1+r²) in R^4; quadrature on [0,R] plus the asymptotic tail.
inline SobolevReport sobolev_constant_4d(double R = 64, std::size_t M = 16384)
{
    auto g = build_grid({4, GridKind::RadialHalfLine, R, M});
    const auto& w = g->weights();
    double grad = 0, quart = 0;
    for (std::size_t i = 0; i < M; ++i) {
        const double r = g->x(i), q = 1 + r * r;
        const double u = 2 * std::sqrt(2.0) / q;
        const double du = -4 * std::sqrt(2.0) * r / (q * q);
        grad += w[i] * du * du;
        quart += w[i] * u * u * u * u;
    }
    // r^5/(1+r^2)^4 = r^-3 - 4r^-5 + 10r^-7 - ..., r^3/(1+r^2)^4 = r^-5 - 4r^-7 + ...
    const double om = sphere_area(4);
    const double R2 = R * R;
    const double g1 = 1 / (2 * R2), g2 = -1 / (R2 * R2), g3 = 10.0 / (6 * R2 * R2 * R2);
    const double q1 = 1 / (4 * R2 * R2), q2 = -4.0 / (6 * R2 * R2 * R2);
    const double gtail = 32 * om * (g1 + g2 + g3);
    const double qtail = 64 * om * (q1 + q2);
    grad += gtail;
    quart += qtail;
    const double dropped = 32 * om * std::abs(g3) + 64 * om * std::abs(q2);
    if (dropped > 1e-6 * quart)
        throw AccuracyError("bubble tail correction too large; increase R");
    SobolevReport rep;
    rep.grad_integral = grad;
    rep.quartic_integral = quart;
    rep.ratio = grad / quart;
    rep.S = std::sqrt(grad);
    if (std::abs(rep.ratio - 1) > 1e-4)
        throw AccuracyError("bubble identity violated beyond tolerance");
    return rep;
}

// Critical threshold at p = 8/N; needs the ground state at p* for N <= 3.
inline double beta_star_critical(int N, double b, const GroundStateProfile* gs_star)
{
    if (N == 4) {
        const double S = sobolev_constant_4d().S;
        return b * S * S;
    }
    if (!gs_star || !near(gs_star->p, 8.0 / N))
        throw UsageError("critical threshold needs the ground state at p = 8/N");
    return 0.5 * b * std::pow(gs_star->l2_norm_sq, 4.0 / N);
}

struct ThresholdReport {
    int N = 1;
    double p = 0, a = 1, b = 1;
    std::optional<double> beta_tilde;          // undefined at p = 8/N
    std::optional<double> beta_p;              // undefined for the Sobolev-critical N=4, p=2
    std::optional<double> beta_star_critical;
    std::optional<double> sobolev_S;
    double l2_norm_sq = 0;
};

inline ThresholdReport threshold_report(int N, double p, double a, double b, bool with_critical = true,
                                        const GroundStateOptions& o = {})
{
    const bool sobolev_critical = (N == 4 && near(p, 2.0));
    if (!sobolev_critical)
        check_exponent(N, p);
    ThresholdReport r;
    r.N = N;
    r.p = p;
    r.a = a;
    r.b = b;
    const double pstar = 8.0 / N;
    if (p > pstar + exponent_tol)
        throw DomainError("p exceeds 8/N");
    if (!sobolev_critical) {
        auto gs = shoot_ground_state(N, p, 1e-4, o);
        r.l2_norm_sq = gs.l2_norm_sq;
        r.beta_p = beta_p(b, gs);
        if (p < pstar - exponent_tol)
            r.beta_tilde = beta_tilde(N, p, a, b, gs);
        if (with_critical || near(p, pstar)) {
            if (N == 4)
                r.beta_star_critical = beta_star_critical(N, b, nullptr);
            else if (near(p, pstar))
                r.beta_star_critical = beta_star_critical(N, b, &gs);
            else {
                auto gs_star = shoot_ground_state(N, pstar, 1e-4, o);
                r.beta_star_critical = beta_star_critical(N, b, &gs_star);
            }
        }
    } else {
        r.beta_star_critical = beta_star_critical(N, b, nullptr);
    }
    if (N == 4)
        r.sobolev_S = sobolev_constant_4d().S;
    return r;
}

enum class Regime {
    MinimizerExists,
    MinimizerExistsBoundaryCase,
    NoMinimizerEnergyZero,
    NoMinimizerEnergyMinusInfinity
};

inline const char* to_string(Regime r)
{
    switch (r) {
    case Regime::MinimizerExists: return "MinimizerExists";
    case Regime::MinimizerExistsBoundaryCase: return "MinimizerExistsBoundaryCase";
    case Regime::NoMinimizerEnergyZero: return "NoMinimizerEnergyZero";
    case Regime::NoMinimizerEnergyMinusInfinity: return "NoMinimizerEnergyMinusInfinity";
    }
    return "?";
}

struct ExistenceVerdict {
    Regime regime;
    std::string reason;
};

inline ExistenceVerdict classify_existence(int N, double p, double beta, double a, double b, bool trapped,
                                           const ThresholdReport& rep)
{
    (void)a;
    (void)b;
    const double lower = 4.0 / N, pstar = 8.0 / N;
    const bool critical = near(p, pstar);
    if (p > pstar + exponent_tol)
        return {Regime::NoMinimizerEnergyMinusInfinity, "p > 8/N: energy unbounded below"};
    if (trapped) {
        if (!critical)
            return {Regime::MinimizerExists, "trapping potential, p < 8/N: minimizer for every beta"};
        if (N == 4)
            throw UsageError("trapped critical case is unsupported for N = 4");
        const double bc = rep.beta_star_critical.value();
        if (beta <= bc)
            return {Regime::MinimizerExists, "trapping potential, p = 8/N, beta <= beta_p*: minimizer with positive energy"};
        return {Regime::NoMinimizerEnergyMinusInfinity, "trapping potential, p = 8/N, beta > beta_p*: energy unbounded below"};
    }
    if (critical) {
        const double bc = rep.beta_star_critical.value();
        if (beta <= bc)
            return {Regime::NoMinimizerEnergyZero, "zero potential, p = 8/N, beta <= critical threshold: infimum 0 not attained"};
        return {Regime::NoMinimizerEnergyMinusInfinity, "zero potential, p = 8/N, beta above critical threshold: energy unbounded below"};
    }
    const double bt = rep.beta_tilde.value();
    if (p <= lower + exponent_tol) {
        if (beta > bt)
            return {Regime::MinimizerExists, "zero potential, p <= 4/N, beta > beta_tilde"};
        return {Regime::NoMinimizerEnergyZero, "zero potential, p <= 4/N, beta <= beta_tilde: infimum 0 not attained"};
    }
    if (std::abs(beta - bt) <= 1e-12 * bt)
        return {Regime::MinimizerExistsBoundaryCase, "zero potential, 4/N < p < 8/N, beta = beta_tilde: minimizer with zero energy"};
    if (beta > bt)
        return {Regime::MinimizerExists, "zero potential, 4/N < p < 8/N, beta > beta_tilde"};
    return {Regime::NoMinimizerEnergyZero, "zero potential, 4/N < p < 8/N, beta < beta_tilde: infimum 0 not attained"};
}

} // namespace kirchhoff
