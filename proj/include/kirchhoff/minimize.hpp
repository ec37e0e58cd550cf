#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "energy.hpp"
#include "groundstate.hpp"

namespace kirchhoff {

enum class Status { Converged, DivergedUnbounded, VanishingSpreading, MaxIters };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::Converged: return "Converged";
    case Status::DivergedUnbounded: return "DivergedUnbounded";
    case Status::VanishingSpreading: return "VanishingSpreading";
    case Status::MaxIters: return "MaxIters";
    }
    return "?";
}

struct FlowConfig {
    double dt = 0.1;
    double dt_min = 1e-14;
    double dt_max = 1e8;
    int max_iters = 50000;
    double energy_tol = 1e-10;
    double grad_tol = 1e-8;
    double divergence_T_max = std::numeric_limits<double>::quiet_NaN(); // NaN: resolution cap only
    int multistart = 4;
    bool keep_history = false;

    void validate() const
    {
        if (!(dt_min > 0) || !(dt_min <= dt) || !(dt <= dt_max))
            throw ConfigError("need 0 < dt_min <= dt <= dt_max");
        if (!(energy_tol > 0) || !(grad_tol > 0))
            throw ConfigError("tolerances must be positive");
        if (max_iters < 1 || multistart < 1)
            throw ConfigError("max_iters and multistart must be at least 1");
    }
};

struct MinimizeResult {
    Field u_final;
    EnergyBreakdown energy;
    double lambda = 0;
    double grad_residual = 0;
    int iterations = 0;
    Status status = Status::MaxIters;
    int start_index = 0;
    double max_mass_defect = 0;   // over accepted steps
    double max_energy_rise = 0;   // over accepted steps
    double min_value = 0;         // smallest sample over accepted iterates
    std::vector<double> energies; // accepted-step energies when kept
};

inline Field project_sphere(const Grid& g, const Field& u)
{
    check_on(g, u);
    const double m = mass(u);
    if (!(m > 0) || !std::isfinite(m))
        throw DomainError("cannot normalize the zero field");
    const double s = 1.0 / std::sqrt(m);
    Field out(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] = s * u[i];
    return out;
}

namespace detail {

// Tridiagonal solve (Thomas); lower/upper have length n-1.
inline std::vector<double> solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                                         std::vector<double> upper, std::vector<double> rhs)
{
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0 || !std::isfinite(diag[i - 1]))
            throw NumericalError("singular tridiagonal system");
        const double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0 || !std::isfinite(diag[n - 1]))
        throw NumericalError("singular tridiagonal system");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    for (double x : rhs)
        if (!std::isfinite(x))
            throw NumericalError("non-finite flow update");
    return rhs;
}

} // namespace detail

// One stabilized semi-implicit step. The Kirchhoff coefficient and the
// nonlinear potential are frozen at u_n, and the shift σ = β max|u_n|^p is
// added on both sides so the matrix stays an M-matrix and stationary
// points of the flow are exactly the constrained critical points.
inline Field flow_step(const ModelParams& m, const std::vector<double>& V, const Grid& g, const Field& u, double dt)
{
    check_on(g, u);
    const std::size_t M = g.size();
    const auto& w = g.weights();
    const auto& k = g.conductance();
    const double c = m.a + m.b * grad_sq(g, u);
    double sigma = 0;
    std::vector<double> up(M);
    for (std::size_t i = 0; i < M; ++i) {
        up[i] = m.beta * std::pow(std::abs(u[i]), m.p);
        sigma = std::max(sigma, up[i]);
    }
    std::vector<double> lo(M - 1), di(M), hi(M - 1), rhs(M);
    for (std::size_t i = 0; i < M; ++i) {
        di[i] = w[i] * (1 + dt * (V[i] - up[i] + sigma));
        rhs[i] = w[i] * (1 + dt * sigma) * u[i];
    }
    for (std::size_t e = 0; e + 1 < M; ++e) {
        const double kk = dt * c * k[e];
        di[e] += kk;
        di[e + 1] += kk;
        hi[e] = -kk;
        lo[e] = -kk;
    }
    for (std::size_t i = 0; i < M; ++i) {
        if (!g.pinned(i))
            continue;
        di[i] = 1;
        rhs[i] = 0;
        if (i > 0)
            lo[i - 1] = 0;
        if (i + 1 < M)
            hi[i] = 0;
    }
    Field next(u.grid, detail::solve_tridiag(std::move(lo), std::move(di), std::move(hi), std::move(rhs)));
    return project_sphere(g, next);
}

inline Field flow_step(const ModelParams& m, const Potential& V, const Grid& g, const Field& u, double dt)
{
    return flow_step(m, V.on(g), g, u, dt);
}

// ‖g - λu‖ over the free nodes.
inline double gradient_residual(const Grid& g, const Field& grad, const Field& u, double lambda)
{
    const auto& w = g.weights();
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (g.pinned(i))
            continue;
        const double r = grad[i] - lambda * u[i];
        s += w[i] * r * r;
    }
    return std::sqrt(s);
}

// Largest T the grid can represent: profiles narrower than ~4 cells.
inline double resolution_T_cap(const Grid& g) { return 1.0 / (16.0 * g.h() * g.h()); }

inline double r_p_value(double beta, double beta_p_val, double p, int N);

// 1e4 r_p when r_p exists and p > 4/N, else 1e8; clipped by the grid resolution.
inline double default_divergence_cap(const ModelParams& m, const Grid& g, std::optional<double> beta_p_val)
{
    double cap = 1e8;
    const double pstar = 8.0 / m.N;
    if (beta_p_val && m.p > 4.0 / m.N && m.p < pstar - 1e-12 && m.beta * m.p > *beta_p_val * pstar)
        cap = 1e4 * r_p_value(m.beta, *beta_p_val, m.p, m.N);
    return std::min(cap, resolution_T_cap(g));
}

inline MinimizeResult minimize(const ModelParams& m, const Potential& pot, const Grid& g, const Field& init,
                               const FlowConfig& cfg)
{
    m.validate();
    cfg.validate();
    check_on(g, init);
    Field u = init;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (g.pinned(i))
            u[i] = 0;
    if (!(mass(u) > 0))
        throw UsageError("initial field is zero");
    check_finite(u);
    u = project_sphere(g, u);

    const auto V = pot.on(g);
    const double Tcap = std::isnan(cfg.divergence_T_max) ? resolution_T_cap(g)
                                                         : std::min(cfg.divergence_T_max, resolution_T_cap(g));
    const double extent = g.R();

    MinimizeResult res;
    EnergyBreakdown E = energy(m, V, g, u);
    double dt = cfg.dt;
    int accepted = 0, attempts = 0, band = 0;
    res.min_value = *std::min_element(u.v.begin(), u.v.end());
    if (cfg.keep_history)
        res.energies.push_back(E.total);

    auto finish = [&](Status s) {
        res.status = s;
        res.u_final = u;
        res.energy = E;
        res.iterations = accepted;
        res.lambda = m.a * E.T + m.b * E.T * E.T + E.V_term - m.beta * E.lp2;
        res.grad_residual = gradient_residual(g, energy_gradient(m, V, g, u), u, res.lambda);
        return res;
    };

    while (accepted < cfg.max_iters && attempts < 4 * cfg.max_iters) {
        ++attempts;
        Field trial = flow_step(m, V, g, u, dt);
        EnergyBreakdown Et = energy(m, V, g, trial);
        const double slack = 1e-12 * std::max(1.0, std::abs(E.total));
        if (!(Et.total <= E.total + slack)) {
            dt *= 0.5;
            if (dt < cfg.dt_min)
                return finish(Status::MaxIters);
            continue;
        }
        const double dE = E.total - Et.total;
        res.max_energy_rise = std::max(res.max_energy_rise, -dE);
        res.max_mass_defect = std::max(res.max_mass_defect, std::abs(mass(trial) - 1));
        u = std::move(trial);
        E = Et;
        res.min_value = std::min(res.min_value, *std::min_element(u.v.begin(), u.v.end()));
        if (cfg.keep_history)
            res.energies.push_back(E.total);
        ++accepted;
        if (accepted % 10 == 0)
            dt = std::min(dt * 1.1, cfg.dt_max);

        if (E.T > Tcap && dE > 0)
            return finish(Status::DivergedUnbounded);

        const double lambda = m.a * E.T + m.b * E.T * E.T + E.V_term - m.beta * E.lp2;
        const double r = gradient_residual(g, energy_gradient(m, V, g, u), u, lambda);
        const bool still = std::abs(dE) <= cfg.energy_tol * std::max(1.0, std::abs(E.total));
        const bool conv = still && r <= cfg.grad_tol * std::max(1.0, std::abs(lambda));

        if (pot.is_zero()) {
            band = (E.T < 1e-6 && E.total > -1e-8 && E.total < 1e-4) ? band + 1 : 0;
            if (band >= 500)
                return finish(Status::VanishingSpreading);
            // A stationary state filling the box is the finite-domain image of spreading.
            if (conv && E.total >= -1e-8 && rms_radius(u) >= 0.25 * extent)
                return finish(Status::VanishingSpreading);
        }
        if (conv)
            return finish(Status::Converged);
    }
    return finish(Status::MaxIters);
}

// Argmin over t of (a/2)t² + (b/4)t⁴ - β/(2‖φ‖^p) t^{Np/2}; 1 if the curve has no interior minimum.
inline double trial_scale(const ModelParams& m, const GroundStateProfile& gs)
{
    const double q = 0.5 * m.N * m.p;
    const double kq = m.beta / (2 * std::pow(gs.l2_norm_sq, 0.5 * m.p));
    auto f = [&](double t) { return 0.5 * m.a * t * t + 0.25 * m.b * t * t * t * t - kq * std::pow(t, q); };
    double best = 1, fb = f(1.0);
    const double lt_max = 8;
    for (double lt = -6; lt <= lt_max; lt += 0.01) {
        const double t = std::pow(10.0, lt);
        const double v = f(t);
        if (v < fb) {
            fb = v;
            best = t;
        }
    }
    // golden refinement in log t
    double lo = std::log(best) - 0.03, hi = std::log(best) + 0.03;
    for (int it = 0; it < 100; ++it) {
        const double m1 = lo + 0.382 * (hi - lo), m2 = lo + 0.618 * (hi - lo);
        if (f(std::exp(m1)) < f(std::exp(m2)))
            hi = m2;
        else
            lo = m1;
    }
    const double t = std::exp(0.5 * (lo + hi));
    if (fb >= 0 || std::log10(best) > lt_max - 0.05)
        return 1.0;
    return t;
}

inline double potential_center(const Potential& pot, const Grid& g)
{
    if (g.radial() || pot.is_zero())
        return 0.0;
    if (pot.kind == Potential::Kind::HarmonicShifted)
        return pot.c;
    const auto V = pot.on(g);
    return g.x(std::size_t(std::min_element(V.begin(), V.end()) - V.begin()));
}

// Deterministic starting family: seeded ground state, then Gaussians of widths 1, 2, 1/2, 4, 1/4, ...
inline std::vector<Field> initial_family(const ModelParams& m, const Potential& pot, const GridPtr& g, int count,
                                         const GroundStateProfile* gs)
{
    std::vector<Field> out;
    const double c = potential_center(pot, *g);
    if (gs) {
        // keep the seed at least ~8 cells wide
        const double t = std::min(trial_scale(m, *gs), 1.0 / (8 * g->h() * gs->scale_s));
        try {
            out.push_back(unit_ground_state(g, *gs, t, c));
        } catch (const ResolutionError&) {
        }
    }
    for (int k = 0; (int)out.size() < count; ++k) {
        const int j = (k + 1) / 2;
        const double width = std::pow(2.0, (k % 2 == 1) ? j : -j);
        out.push_back(sample(g, [&](double x) { return std::exp(-0.5 * (x - c) * (x - c) / (width * width)); }));
    }
    out.resize(std::min<std::size_t>(out.size(), count));
    return out;
}

// Lowest energy among Converged starts (ties within 1e-10: smaller residual,
// then start index); otherwise the most common non-converged status.
inline MinimizeResult select_result(std::vector<MinimizeResult> rs)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i].status != Status::Converged)
            continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& b = rs[*best];
        const double de = rs[i].energy.total - b.energy.total;
        if (de < -1e-10 || (std::abs(de) <= 1e-10 && rs[i].grad_residual < b.grad_residual))
            best = i;
    }
    if (best)
        return rs[*best];
    std::map<Status, int> votes;
    for (const auto& r : rs)
        ++votes[r.status];
    Status top = rs.front().status;
    for (const auto& r : rs)
        if (votes[r.status] > votes[top])
            top = r.status;
    for (auto& r : rs)
        if (r.status == top)
            return r;
    return rs.front();
}

inline MinimizeResult multistart_minimize(const ModelParams& m, const Potential& pot, const GridPtr& g,
                                          const FlowConfig& cfg, const GroundStateProfile* gs = nullptr)
{
    cfg.validate();
    auto seeds = initial_family(m, pot, g, cfg.multistart, gs);
    std::vector<MinimizeResult> rs;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto r = minimize(m, pot, *g, seeds[i], cfg);
        r.start_index = int(i);
        rs.push_back(std::move(r));
    }
    return select_result(std::move(rs));
}

inline double r_p_value(double beta, double beta_p_val, double p, int N)
{
    const double pstar = 8.0 / N;
    if (!(p < pstar - 1e-12))
        throw DomainError("r_p needs p < 8/N");
    return std::pow(beta * p / (beta_p_val * pstar), pstar / (pstar - p));
}

} // namespace kirchhoff
