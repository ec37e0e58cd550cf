#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "energy.hpp"
#include "minimize.hpp"
#include "thresholds.hpp"

namespace kirchhoff {

inline constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

inline double r_p(double beta, double beta_p_val, double p, int N)
{
    return r_p_value(beta, beta_p_val, p, N);
}

inline double d_asymptotic(double b, double beta, double beta_p_val, double p, int N)
{
    const double pstar = 8.0 / N;
    return -(b * (pstar - p) / (4 * p)) * r_p(beta, beta_p_val, p, N);
}

// |u|²-mass centroid on the line; the origin on radial grids.
inline double concentration_center(const Grid& g, const Field& u)
{
    check_on(g, u);
    const double m = mass(u);
    if (!(m > 0))
        throw DomainError("centre of the zero field");
    if (g.radial())
        return 0.0;
    const auto& w = g.weights();
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += w[i] * g.x(i) * u[i] * u[i];
    return s / m;
}

// w(x) = eps^{N/2} u(eps x + center) on the reference grid.
inline Field rescale_minimizer(const Grid& g, const Field& u, double eps, double center, const GridPtr& ref)
{
    check_on(g, u);
    if (!(eps > 0))
        throw DomainError("rescaling factor must be positive");
    if (g.radial() && center != 0)
        throw DomainError("radial fields are centred at the origin");
    // physical window covered by the reference grid
    const double lo = center - eps * ref->R(), hi = center + eps * ref->R();
    const auto& w = g.weights();
    double outside = 0, total = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double q = w[i] * u[i] * u[i];
        total += q;
        const double x = g.x(i);
        if ((g.radial() && x > hi) || (!g.radial() && (x < lo || x > hi)))
            outside += q;
    }
    if (outside > 1e-6 * total)
        throw ResolutionError("rescaled support exceeds the reference grid");
    Interpolant f(u);
    const double amp = std::pow(eps, 0.5 * g.dim());
    return sample(ref, [&](double x) { return amp * f(eps * x + center); });
}

struct ProfileDistance {
    double l2 = 0;
    double h1 = 0;
};

// Distance from w (re-centred by its centroid) to φ/‖φ‖ of the reference state.
inline ProfileDistance profile_distance(const Field& w, const GroundStateProfile& ref)
{
    const Grid& g = *w.grid;
    const double c = concentration_center(g, w);
    const double inv = 1.0 / ref.norm();
    Field d(w.grid);
    for (std::size_t i = 0; i < w.size(); ++i)
        d[i] = w[i] - inv * ref.eval(g.x(i) - c);
    ProfileDistance out;
    out.l2 = std::sqrt(mass(d));
    out.h1 = std::sqrt(mass(d) + grad_sq(g, d));
    return out;
}

struct SweepSpec {
    double a = 1, b = 1, beta = 1;
    int N = 1;
    Potential V;
    std::vector<double> deltas{0.5, 0.3, 0.2, 0.1, 0.05, 0.02};
    GridSpec grid{1, GridKind::FullLine1D, 10, 4096};   // physical frame
    bool rescaled = true;
    double w_extent = 24;                               // rescaled-frame grid
    std::size_t w_nodes = 8193;
    FlowConfig flow;
    bool with_free = false;                             // also solve with V = 0
    bool richardson = true;                             // extrapolate rescaled-frame values in h

    void validate() const
    {
        if (N < 1 || N > 3)
            throw ConfigError("sweeps need N in 1..3");
        const double pstar = 8.0 / N;
        for (double d : deltas)
            if (!(d > 0) || !(pstar - d > 4.0 / N))
                throw ConfigError("schedule gaps must keep p in (4/N, 8/N)");
        if (!(a > 0) || !(b > 0) || !(beta > 0))
            throw ConfigError("a, b, beta must be positive");
        flow.validate();
    }
};

struct SweepRecord {
    double p = 0, delta = 0;
    double d_measured = nan_v, d_asym = nan_v, ratio_d = nan_v;
    double r_p = nan_v, eps_p = nan_v;
    double T = nan_v, T_sq_over_rp = nan_v, interaction_scaled_over_rp = nan_v;
    double lambda = nan_v, lambda_eps4 = nan_v, V_term = nan_v;
    double profile_dist = nan_v, center_x = nan_v;
    double beta_p = nan_v, beta_scaled = nan_v;         // β_p, and β ε^{4-Np/2}
    double d_free = nan_v;                              // infimum with V = 0
    double gap_bound = nan_v;                           // ½∫V ũ² for the free minimizer ũ moved to the trap minimum
    // error bars of the extrapolated rescaled-frame values (0 when not extrapolated)
    double d_err = 0, T_err = 0, lambda_eps4_err = 0, interaction_scaled_over_rp_err = 0, profile_dist_err = 0;
    double d_free_err = 0;
    Status status = Status::MaxIters;
    int iterations = 0;
    bool rescaled_frame = false;
    Field field;                                        // u_p, or w_p in the rescaled frame
};

namespace detail {

inline Potential frame_potential(const Potential& V, const GridPtr& wg, double eps, double c)
{
    if (V.is_zero())
        return V;
    const double e4 = std::pow(eps, 4);
    return Potential::tabulated(sample(wg, [&](double y) { return e4 * V(eps * y + c); }));
}

// ½∫V ũ² with ũ translated so its centroid sits at c. Since d ≤ E_V(ũ) this
// bounds d - d_free from above; V_term/2 bounds it from below.
inline double shifted_potential_energy(const std::vector<double>& V, const Field& u, double c)
{
    const Grid& g = *u.grid;
    Field v = u;
    if (!g.radial()) {
        const double shift = concentration_center(g, u) - c;
        Interpolant f(u);
        v = sample(u.grid, [&](double x) { return f(x + shift); });
    }
    const auto& w = g.weights();
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += w[i] * V[i] * v[i] * v[i];
    return 0.5 * s;
}

inline MinimizeResult solve_with_fallback(const ModelParams& m, const Potential& V, const GridPtr& g,
                                          const Field& seed, FlowConfig cfg, const GroundStateProfile* gs)
{
    auto r = minimize(m, V, *g, seed, cfg);
    if (r.status == Status::Converged)
        return r;
    auto alt = multistart_minimize(m, V, g, cfg, gs);
    return alt.status == Status::Converged ? alt : r;
}

} // namespace detail

inline std::vector<SweepRecord> run_sweep(const SweepSpec& spec)
{
    spec.validate();
    const int N = spec.N;
    const double pstar = 8.0 / N;
    auto gs_star = shoot_ground_state(N, pstar, 1e-4);

    auto pg = build_grid(spec.grid);
    const GridKind wkind = spec.grid.kind;
    auto wg = build_grid({N, wkind, spec.w_extent, spec.w_nodes});
    std::vector<GridPtr> wgs{wg, build_grid({N, wkind, spec.w_extent, 2 * spec.w_nodes - 1}),
                             build_grid({N, wkind, spec.w_extent, 4 * spec.w_nodes - 3})};
    const double c0 = potential_center(spec.V, *pg);

    std::vector<SweepRecord> out;
    std::optional<Field> prev_w, prev_u;
    double prev_eps = nan_v, center = c0;

    for (double delta : spec.deltas) {
        SweepRecord rec;
        rec.delta = delta;
        rec.p = pstar - delta;
        const double p = rec.p;
        auto gs = shoot_ground_state(N, p, 1e-4);
        rec.beta_p = beta_p(spec.b, gs);
        const bool has_rp = spec.beta * p > rec.beta_p * pstar;
        if (has_rp) {
            rec.r_p = r_p(spec.beta, rec.beta_p, p, N);
            rec.eps_p = std::pow(rec.r_p, -0.25);
            rec.d_asym = d_asymptotic(spec.b, spec.beta, rec.beta_p, p, N);
            rec.beta_scaled = spec.beta * std::pow(rec.eps_p, 4 - 0.5 * N * p);
        }
        const bool use_w = has_rp && (spec.rescaled || rec.eps_p < 8 * pg->h());
        rec.rescaled_frame = use_w;
        ModelParams phys{spec.a, spec.b, spec.beta, p, N};

        if (use_w) {
            const double eps = rec.eps_p;
            const double e4 = std::pow(eps, 4);
            ModelParams mw{spec.a * eps * eps, spec.b, rec.beta_scaled, p, N};
            Field seed = prev_w ? *prev_w : unit_ground_state(wg, gs_star);
            if (!prev_w && prev_u) {
                try {
                    seed = rescale_minimizer(*pg, *prev_u, eps, pg->radial() ? 0.0 : center, wg);
                } catch (const ResolutionError&) {
                }
            }
            FlowConfig cfg = spec.flow;
            cfg.divergence_T_max = 1e4;

            struct Scalars {
                double E, T, lp2, lambda, Vt, Efree, eta;
            };
            auto solve_on = [&](const GridPtr& g, const Field& s0, MinimizeResult& r) {
                auto Vw = detail::frame_potential(spec.V, g, eps, center);
                r = detail::solve_with_fallback(mw, Vw, g, s0, cfg, &gs_star);
                Scalars sc{r.energy.total, r.energy.T, r.energy.lp2, r.lambda, r.energy.V_term, nan_v, nan_v};
                if (spec.with_free) {
                    auto rf = detail::solve_with_fallback(mw, Potential::zero(), g, r.u_final, cfg, &gs_star);
                    sc.Efree = rf.energy.total;
                    sc.eta = detail::shifted_potential_energy(Vw.on(*g), rf.u_final, 0.0);
                }
                return sc;
            };
            // Solve on h, h/2, h/4 (when enabled); the O(h²) parts of the scalars
            // cancel in (4 S_fine - S_coarse)/3 and successive extrapolations
            // give an error bar.
            const std::size_t levels = spec.richardson ? 3 : 1;
            std::vector<MinimizeResult> rs(levels);
            std::vector<Scalars> sv(levels);
            sv[0] = solve_on(wgs[0], seed, rs[0]);
            for (std::size_t l = 1; l < levels; ++l) {
                Interpolant f(rs[l - 1].u_final);
                sv[l] = solve_on(wgs[l], sample(wgs[l], [&](double x) { return f(x); }), rs[l]);
            }
            prev_w = rs[0].u_final;
            MinimizeResult r = rs[levels - 1];
            Scalars sc = sv[levels - 1];
            Field wbest = r.u_final;
            for (std::size_t l = 0; l + 1 < levels; ++l)
                if (rs[l].status != Status::Converged)
                    r.status = rs[l].status;
            for (std::size_t l = 0; l + 1 < levels; ++l)
                r.iterations += rs[l].iterations;
            Scalars err{0, 0, 0, 0, 0, 0, 0};
            if (levels == 3) {
                auto ex = [](double c, double fn) { return (4 * fn - c) / 3; };
                auto ex_all = [&](const Scalars& c, const Scalars& fn) {
                    return Scalars{ex(c.E, fn.E), ex(c.T, fn.T), ex(c.lp2, fn.lp2), ex(c.lambda, fn.lambda),
                                   ex(c.Vt, fn.Vt), ex(c.Efree, fn.Efree), ex(c.eta, fn.eta)};
                };
                const Scalars e1 = ex_all(sv[0], sv[1]), e2 = ex_all(sv[1], sv[2]);
                sc = e2;
                err = {std::abs(e2.E - e1.E), std::abs(e2.T - e1.T), std::abs(e2.lp2 - e1.lp2),
                       std::abs(e2.lambda - e1.lambda), std::abs(e2.Vt - e1.Vt), std::abs(e2.Efree - e1.Efree), 0};
                auto field_ex = [&](const Field& c, const Field& fn) {
                    Interpolant fc(c);
                    Field out(fn.grid);
                    for (std::size_t i = 0; i < fn.size(); ++i)
                        out[i] = (4 * fn[i] - fc(fn.grid->x(i))) / 3;
                    return out;
                };
                wbest = field_ex(rs[1].u_final, rs[2].u_final);
                const Field w1 = field_ex(rs[0].u_final, rs[1].u_final);
                rec.profile_dist_err = std::abs(profile_distance(wbest, gs_star).l2 - profile_distance(w1, gs_star).l2);
            }
            rec.status = r.status;
            rec.iterations = r.iterations;
            rec.d_measured = sc.E / e4;
            rec.T = sc.T / (eps * eps);
            rec.lambda = sc.lambda / e4;
            rec.V_term = sc.Vt / e4;
            rec.d_free = sc.Efree / e4;
            rec.gap_bound = sc.eta / e4;
            const double lp2 = sc.lp2 * std::pow(eps, -0.5 * N * p);
            rec.interaction_scaled_over_rp = 4 * spec.beta / (spec.b * (p + 2)) * lp2 / rec.r_p;
            const GridPtr& og = r.u_final.grid;
            const double cw = concentration_center(*og, r.u_final);
            rec.center_x = og->radial() ? 0.0 : center + eps * cw;
            rec.profile_dist = profile_distance(wbest, gs_star).l2;
            rec.field = r.u_final;
            if (levels == 3) {
                rec.d_err = err.E / e4;
                rec.d_free_err = err.Efree / e4;
                rec.T_err = err.T / (eps * eps);
                rec.lambda_eps4_err = err.lambda;
                rec.interaction_scaled_over_rp_err = 4 * rec.beta_scaled / (spec.b * (p + 2)) * err.lp2;
            }
            if (!og->radial())
                center = rec.center_x;
        } else {
            Field seed = prev_u ? *prev_u : Field(pg);
            if (prev_u && has_rp && !std::isnan(prev_eps)) {
                try {
                    seed = dilate(*pg, *prev_u, prev_eps / rec.eps_p);
                } catch (const ResolutionError&) {
                }
            }
            FlowConfig cfg = spec.flow;
            cfg.divergence_T_max = default_divergence_cap(phys, *pg, rec.beta_p);
            MinimizeResult r;
            if (prev_u)
                r = detail::solve_with_fallback(phys, spec.V, pg, seed, cfg, &gs);
            else
                r = multistart_minimize(phys, spec.V, pg, cfg, &gs);
            rec.status = r.status;
            rec.iterations = r.iterations;
            rec.d_measured = r.energy.total;
            rec.T = r.energy.T;
            rec.lambda = r.lambda;
            rec.V_term = r.energy.V_term;
            rec.center_x = concentration_center(*pg, r.u_final);
            if (has_rp) {
                rec.interaction_scaled_over_rp = 4 * spec.beta / (spec.b * (p + 2)) * r.energy.lp2 / rec.r_p;
                try {
                    auto w = rescale_minimizer(*pg, r.u_final, rec.eps_p, pg->radial() ? 0.0 : rec.center_x, wg);
                    rec.profile_dist = profile_distance(w, gs_star).l2;
                } catch (const ResolutionError&) {
                }
            }
            rec.field = r.u_final;
            prev_u = r.u_final;
            if (spec.with_free) {
                auto rf = minimize(phys, Potential::zero(), *pg, r.u_final, cfg);
                rec.d_free = rf.energy.total;
                rec.gap_bound = detail::shifted_potential_energy(spec.V.on(*pg), rf.u_final, c0);
            }
        }
        if (has_rp) {
            rec.ratio_d = rec.d_measured / rec.d_asym;
            rec.T_sq_over_rp = rec.T * rec.T / rec.r_p;
            rec.lambda_eps4 = rec.lambda * std::pow(rec.eps_p, 4);
        }
        prev_eps = rec.eps_p;
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace kirchhoff
