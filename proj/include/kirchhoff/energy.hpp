#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"
#include "groundstate.hpp"

namespace kirchhoff {

struct ModelParams {
    double a = 1, b = 1, beta = 1, p = 2;
    int N = 1;

    void validate() const
    {
        if (N < 1 || N > 4)
            throw ConfigError("dimension must be in 1..4");
        if (!(a > 0) || !(b > 0))
            throw ConfigError("a and b must be positive");
        if (!std::isfinite(beta))
            throw ConfigError("beta must be finite");
        if (!(p > 0) || p > 8.0 / N + 1e-12)
            throw ConfigError("p must lie in (0, 8/N]");
        if (N >= 3 && p > 4.0 / (N - 2) + 1e-12)
            throw ConfigError("p must not exceed 4/(N-2)");
    }
};

struct Potential {
    enum class Kind { Zero, HarmonicShifted, PowerRadial, Tabulated };
    Kind kind = Kind::Zero;
    double k = 1, c = 0, s = 2;
    std::shared_ptr<const Field> table;

    static Potential zero() { return {}; }
    static Potential harmonic(double k, double c = 0)
    {
        Potential v;
        v.kind = Kind::HarmonicShifted;
        v.k = k;
        v.c = c;
        return v;
    }
    static Potential power(double s)
    {
        Potential v;
        v.kind = Kind::PowerRadial;
        v.s = s;
        return v;
    }
    static Potential tabulated(Field f)
    {
        Potential v;
        v.kind = Kind::Tabulated;
        v.table = std::make_shared<const Field>(std::move(f));
        return v;
    }

    bool is_zero() const { return kind == Kind::Zero; }

    double operator()(double x) const
    {
        switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::HarmonicShifted: return k * (x - c) * (x - c);
        case Kind::PowerRadial: return std::pow(std::abs(x), s);
        case Kind::Tabulated: return Interpolant(*table)(x);
        }
        return 0.0;
    }

    std::vector<double> on(const Grid& g) const
    {
        if (kind == Kind::HarmonicShifted && g.radial() && c != 0)
            throw ConfigError("shifted harmonic trap needs a full-line grid");
        if (kind == Kind::Tabulated) {
            check_on(g, *table);
            return table->v;
        }
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            v[i] = (*this)(g.x(i));
        return v;
    }

    std::string describe() const
    {
        std::ostringstream os;
        os.precision(17);
        switch (kind) {
        case Kind::Zero: os << "zero"; break;
        case Kind::HarmonicShifted: os << "harmonic:" << k << ":" << c; break;
        case Kind::PowerRadial: os << "power:" << s; break;
        case Kind::Tabulated: os << "tabulated"; break;
        }
        return os.str();
    }
};

struct EnergyBreakdown {
    double kinetic = 0, kirchhoff = 0, potential = 0, interaction = 0, total = 0;
    double T = 0;          // ∫|∇u|²
    double lp2 = 0;        // ∫|u|^{p+2}
    double V_term = 0;     // ∫V u²
};

inline void check_finite(const Field& u)
{
    for (double x : u.v)
        if (!std::isfinite(x))
            throw DomainError("field has non-finite values");
}

inline EnergyBreakdown energy(const ModelParams& m, const std::vector<double>& V, const Grid& g, const Field& u)
{
    check_on(g, u);
    check_finite(u);
    const auto& w = g.weights();
    EnergyBreakdown e;
    e.T = grad_sq(g, u);
    double vt = 0, lp = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a2 = u[i] * u[i];
        vt += w[i] * V[i] * a2;
        lp += w[i] * std::pow(std::abs(u[i]), m.p + 2);
    }
    e.V_term = vt;
    e.lp2 = lp;
    e.kinetic = 0.5 * m.a * e.T;
    e.kirchhoff = 0.25 * m.b * e.T * e.T;
    e.potential = 0.5 * vt;
    e.interaction = m.beta / (m.p + 2) * lp;
    e.total = e.kinetic + e.kirchhoff + e.potential - e.interaction;
    return e;
}

inline EnergyBreakdown energy(const ModelParams& m, const Potential& V, const Grid& g, const Field& u)
{
    return energy(m, V.on(g), g, u);
}

// L²(w) gradient of the discrete energy: -(a + bT)Δu + Vu - β|u|^p u.
inline Field energy_gradient(const ModelParams& m, const std::vector<double>& V, const Grid& g, const Field& u)
{
    check_on(g, u);
    const double T = grad_sq(g, u);
    const auto ku = apply_stiffness(g, u.v);
    const auto& w = g.weights();
    Field out(u.grid);
    const double coef = m.a + m.b * T;
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = coef * ku[i] / w[i] + V[i] * u[i] - m.beta * std::pow(std::abs(u[i]), m.p) * u[i];
    return out;
}

inline Field energy_gradient(const ModelParams& m, const Potential& V, const Grid& g, const Field& u)
{
    return energy_gradient(m, V.on(g), g, u);
}

inline double rms_radius(const Field& u)
{
    const Grid& g = *u.grid;
    const auto& w = g.weights();
    double m0 = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double q = w[i] * u[i] * u[i];
        m0 += q;
        m1 += q * g.x(i);
        m2 += q * g.x(i) * g.x(i);
    }
    if (!(m0 > 0))
        return 0;
    const double c = g.radial() ? 0.0 : m1 / m0;
    return std::sqrt(std::max(0.0, m2 / m0 - c * c));
}

// t^{N/2} u(t x), resampled by monotone cubic interpolation.
inline Field dilate(const Grid& g, const Field& u, double t)
{
    check_on(g, u);
    if (!(t > 0))
        throw DomainError("dilation factor must be positive");
    if (t == 1.0)
        return u;
    if (rms_radius(u) / t < 4 * g.h())
        throw ResolutionError("dilated profile narrower than the grid resolution");
    Interpolant f(u);
    const double amp = std::pow(t, 0.5 * g.dim());
    return sample(u.grid, [&](double x) { return amp * f(t * x); });
}

inline double lagrange_multiplier(const ModelParams& m, const std::vector<double>& V, const Grid& g, const Field& u)
{
    if (std::abs(mass(u) - 1) > 1e-8)
        throw UsageError("multiplier formula needs a unit-mass field");
    const auto e = energy(m, V, g, u);
    return m.a * e.T + m.b * e.T * e.T + e.V_term - m.beta * e.lp2;
}

inline double lagrange_multiplier(const ModelParams& m, const Potential& V, const Grid& g, const Field& u)
{
    return lagrange_multiplier(m, V.on(g), g, u);
}

inline double lambda_pohozaev(const ModelParams& m, const Grid& g, const Field& u,
                              const Potential& V = Potential::zero())
{
    if (!V.is_zero())
        throw UsageError("Pohozaev multiplier holds only without a potential");
    check_on(g, u);
    const double coef = ((m.N - 2) * m.beta * m.p - 4 * m.beta) / (2 * (m.p + 2));
    return coef * lp_integral(u, m.p + 2);
}

// Normalized ground state φ/‖φ‖ sampled on g, dilated by t.
inline Field unit_ground_state(const GridPtr& g, const GroundStateProfile& gs, double t = 1.0, double center = 0.0)
{
    const double amp = std::pow(t, 0.5 * g->dim()) / gs.norm();
    return sample(g, [&](double x) { return amp * gs.eval(t * (x - center)); });
}

} // namespace kirchhoff
