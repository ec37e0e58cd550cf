#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/numeric/odeint.hpp>

#include "error.hpp"
#include "grid.hpp"

namespace kirchhoff {

// Positive radial solution of -(Np/4) Δφ + (1 + (p/4)(2-N)) φ = φ^{p+1}.
// Internally phi(r) = c^{1/p} Q(s r) with Q'' + (N-1)/ρ Q' = Q - Q^{p+1}.
struct GroundStateProfile {
    int N = 1;
    double p = 2;
    Field profile;
    std::vector<double> slope;     // φ'(r) at the nodes
    double l2_norm_sq = 0;
    double dirichlet = 0;
    double lp2_norm = 0;
    double shoot_height = 0;
    double pohozaev_res1 = 0;
    double pohozaev_res2 = 0;

    double coef_c = 1;             // 1 + (p/4)(2-N)
    double scale_s = 1;            // sqrt(c / (Np/4))
    double r_splice = 0;           // analytic tail beyond this radius
    double tail_amp = 0;

    double norm() const { return std::sqrt(l2_norm_sq); }

    // φ(r) off the grid: Hermite cubic with exact slopes, analytic tail outside.
    double eval(double r) const
    {
        r = std::abs(r);
        if (r >= r_splice)
            return tail(r);
        return (*herm_)(r);
    }

    double tail(double r) const
    {
        const double nu = std::abs(0.5 * (N - 2));
        const double rho = scale_s * r;
        if (rho <= 0)
            return shoot_height;
        if (rho > 600)
            return 0.0;
        return tail_amp * std::pow(rho, -0.5 * (N - 2)) * std::cyl_bessel_k(nu, rho);
    }

    void build_interp()
    {
        std::vector<double> xs = profile.grid->nodes(), ys = profile.v, ds = slope;
        herm_ = std::make_shared<boost::math::interpolators::cubic_hermite<std::vector<double>>>(
            std::move(xs), std::move(ys), std::move(ds));
    }

private:
    std::shared_ptr<boost::math::interpolators::cubic_hermite<std::vector<double>>> herm_;
};

struct GroundStateOptions {
    std::size_t M = 4096;
    std::size_t M_max = 32768;
    double decay_lengths = 32;   // grid extent in units of 1/s
    double ode_rtol = 1e-13;
    double ode_atol = 1e-16;
};

inline double critical_exponent(int N) { return 8.0 / N; }

inline void check_exponent(int N, double p)
{
    if (N < 1 || N > 4)
        throw ConfigError("dimension must be in 1..4");
    if (!(p > 0) || !std::isfinite(p))
        throw ConfigError("exponent p must be positive");
    if (N >= 3 && !(p < 4.0 / (N - 2)))
        throw ConfigError("exponent p must be below the Sobolev exponent 4/(N-2)");
}

namespace detail {

using State = std::array<double, 2>;

struct Canonical {
    int N;
    double p;
    void operator()(const State& y, State& dy, double rho) const
    {
        const double q = y[0];
        dy[0] = y[1];
        dy[1] = q - std::pow(std::abs(q), p) * q - (rho > 0 ? (N - 1) * y[1] / rho : 0.0);
    }
};

enum class Shot { Overshoot, Undershoot };

// Integrates from the series start until Q < 0 or Q' > 0. If `nodes` is
// given, fills Q and Q' at those radii reached before termination.
inline Shot shoot(int N, double p, double alpha, double rtol, double atol,
                  const std::vector<double>* nodes = nullptr,
                  std::vector<double>* q = nullptr, std::vector<double>* dq = nullptr)
{
    using namespace boost::numeric::odeint;
    Canonical sys{N, p};
    const double curv = (alpha - std::pow(alpha, p + 1)) / N;
    double rho0 = (N == 1) ? 0.0 : 1e-4;
    State y{alpha + 0.5 * curv * rho0 * rho0, curv * rho0};
    auto st = make_dense_output(atol, rtol, runge_kutta_dopri5<State>());
    st.initialize(y, rho0, 1e-3);

    std::size_t k = 0;
    if (nodes) {
        q->assign(nodes->size(), std::numeric_limits<double>::quiet_NaN());
        dq->assign(nodes->size(), std::numeric_limits<double>::quiet_NaN());
        while (k < nodes->size() && (*nodes)[k] <= rho0) {
            const double r = (*nodes)[k];
            (*q)[k] = alpha + 0.5 * curv * r * r;
            (*dq)[k] = curv * r;
            ++k;
        }
    }
    const double rho_max = 200.0;
    for (int it = 0; it < 2000000; ++it) {
        st.do_step(sys);
        const double t = st.current_time();
        const State& s = st.current_state();
        if (nodes) {
            State tmp;
            while (k < nodes->size() && (*nodes)[k] <= t) {
                st.calc_state((*nodes)[k], tmp);
                if (tmp[0] < 0 || tmp[1] > 0)
                    break;
                (*q)[k] = tmp[0];
                (*dq)[k] = tmp[1];
                ++k;
            }
        }
        if (s[0] < 0)
            return Shot::Overshoot;
        if (s[1] > 0)
            return Shot::Undershoot;
        if (t > rho_max)
            return Shot::Undershoot;
    }
    throw SolverError("shooting integration did not terminate");
}

} // namespace detail

// Bisection on the canonical shooting height; returns the bracket.
inline std::pair<double, double> shooting_bracket(int N, double p, const GroundStateOptions& o = {})
{
    check_exponent(N, p);
    double lo = 1.0, hi = 2.0;
    while (detail::shoot(N, p, hi, o.ode_rtol, o.ode_atol) == detail::Shot::Undershoot) {
        lo = hi;
        hi *= 2;
        if (hi > 1e8)
            throw SolverError("no overshooting height below 1e8");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            break;
        if (detail::shoot(N, p, mid, o.ode_rtol, o.ode_atol) == detail::Shot::Overshoot)
            hi = mid;
        else
            lo = mid;
    }
    return {lo, hi};
}

inline void finish_profile(GroundStateProfile& gs)
{
    const Grid& g = *gs.profile.grid;
    gs.shoot_height = gs.profile[0];
    gs.l2_norm_sq = mass(gs.profile);
    gs.dirichlet = grad_sq(g, gs.profile);
    gs.lp2_norm = lp_integral(gs.profile, gs.p + 2);
    gs.pohozaev_res1 = std::abs(gs.l2_norm_sq - gs.dirichlet) / gs.l2_norm_sq;
    gs.pohozaev_res2 = std::abs(gs.l2_norm_sq - 2.0 / (gs.p + 2) * gs.lp2_norm) / gs.l2_norm_sq;
    gs.build_interp();
}

inline GroundStateProfile profile_from_bracket(int N, double p, double lo, double hi, std::size_t M,
                                               const GroundStateOptions& o = {})
{
    GroundStateProfile gs;
    gs.N = N;
    gs.p = p;
    gs.coef_c = 1.0 + 0.25 * p * (2.0 - N);
    gs.scale_s = std::sqrt(gs.coef_c / (0.25 * N * p));
    const double amp = std::pow(gs.coef_c, 1.0 / p);
    const double s = gs.scale_s;

    auto grid = build_grid({N, GridKind::RadialHalfLine, o.decay_lengths / s, M});
    std::vector<double> rho(M);
    for (std::size_t i = 0; i < M; ++i)
        rho[i] = s * grid->x(i);
    std::vector<double> qlo, dlo, qhi, dhi;
    detail::shoot(N, p, lo, o.ode_rtol, o.ode_atol, &rho, &qlo, &dlo);
    detail::shoot(N, p, hi, o.ode_rtol, o.ode_atol, &rho, &qhi, &dhi);

    std::size_t cut = 0;
    for (std::size_t i = 0; i < M; ++i) {
        if (std::isnan(qlo[i]) || std::isnan(qhi[i]))
            break;
        const double m = 0.5 * (qlo[i] + qhi[i]);
        if (std::abs(qhi[i] - qlo[i]) > 1e-7 * m || m < 1e-8 * lo)
            break;
        cut = i;
    }
    if (cut < 2)
        throw SolverError("shooting separatrix lost near the origin");

    const double nu = std::abs(0.5 * (N - 2));
    auto f = [&](double r) { return std::pow(r, -0.5 * (N - 2)) * std::cyl_bessel_k(nu, r); };
    auto df = [&](double r) { return -std::pow(r, -0.5 * (N - 2)) * std::cyl_bessel_k(std::abs(0.5 * N), r); };
    const double qc = 0.5 * (qlo[cut] + qhi[cut]);
    const double A = qc / f(rho[cut]);

    gs.profile = Field(grid);
    gs.slope.assign(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        double q, dq;
        if (i <= cut) {
            q = 0.5 * (qlo[i] + qhi[i]);
            dq = 0.5 * (dlo[i] + dhi[i]);
        } else {
            q = A * f(rho[i]);
            dq = A * df(rho[i]);
        }
        gs.profile[i] = amp * q;
        gs.slope[i] = amp * s * dq;
    }
    gs.profile[M - 1] = 0.0;
    gs.r_splice = grid->x(cut);
    gs.tail_amp = amp * A;
    finish_profile(gs);
    gs.shoot_height = amp * 0.5 * (lo + hi);
    return gs;
}

inline GroundStateProfile shoot_ground_state(int N, double p, double tol, const GroundStateOptions& o = {})
{
    if (!(tol > 0))
        throw ConfigError("tolerance must be positive");
    auto [lo, hi] = shooting_bracket(N, p, o);
    for (std::size_t M = o.M;; M *= 2) {
        auto gs = profile_from_bracket(N, p, lo, hi, M, o);
        if (gs.pohozaev_res1 <= tol && gs.pohozaev_res2 <= tol)
            return gs;
        if (2 * M > o.M_max)
            throw AccuracyError("Pohozaev residuals above tolerance at the largest grid");
    }
}

inline GroundStateProfile closed_form_1d(int N, double p, std::size_t M = 4096, double decay_lengths = 32)
{
    if (N != 1)
        throw UsageError("closed-form ground state exists only for N = 1");
    check_exponent(N, p);
    GroundStateProfile gs;
    gs.N = 1;
    gs.p = p;
    gs.coef_c = 1.0 + 0.25 * p;
    gs.scale_s = std::sqrt((4.0 + p) / p);
    const double s = gs.scale_s;
    const double amp = std::pow((p + 2) * (4 + p) / 8.0, 1.0 / p);
    auto grid = build_grid({1, GridKind::RadialHalfLine, decay_lengths / s, M});
    gs.profile = Field(grid);
    gs.slope.assign(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double z = 0.5 * p * s * grid->x(i);
        const double sech = 1.0 / std::cosh(z);
        gs.profile[i] = amp * std::pow(sech, 2.0 / p);
        gs.slope[i] = -amp * std::pow(sech, 2.0 / p) * std::tanh(z) * s;
    }
    gs.r_splice = grid->R();
    // exp tail matching the last node: sech^{2/p}(z) ~ 2^{2/p} e^{-s r}
    gs.tail_amp = amp * std::pow(2.0, 2.0 / p) / std::sqrt(std::numbers::pi / 2);
    finish_profile(gs);
    gs.shoot_height = amp;
    return gs;
}

// Sharp constant in ∫|u|^{p+2} ≤ C ‖∇u‖^{Np/2} ‖u‖^{2+p(2-N)/2}.
inline double gn_constant(const GroundStateProfile& gs)
{
    return (gs.p + 2) / (2.0 * std::pow(gs.l2_norm_sq, 0.5 * gs.p));
}

inline double gn_ratio(const Grid& g, const Field& u, const GroundStateProfile& gs)
{
    check_on(g, u);
    const double m = mass(u);
    if (!(m > 0))
        throw DomainError("GN quotient of the zero field");
    const double N = g.dim(), p = gs.p;
    const double T = grad_sq(g, u);
    const double rhs = gn_constant(gs) * std::pow(T, N * p / 4) * std::pow(m, 1 + p * (2 - N) / 4);
    return lp_integral(u, p + 2) / rhs;
}

} // namespace kirchhoff
